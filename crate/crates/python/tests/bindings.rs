//! Runs the Python smoke test against the module linked into this binary.

use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;
use trickle_fairness::trickle_fairness;

#[test]
fn smoke_script_passes() {
    pyo3::append_to_inittab!(trickle_fairness);
    Python::initialize();
    let script = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../python/smoke_test.py"
    ))
    .unwrap();
    let code = CString::new(script).unwrap();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("__name__", "__main__").unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("smoke test failed");
        }
    });
}
