// Links the system LAPACK provider used by the dense eigensolver.
// Set CIRCLAW_LAPACK_LIB to link a different library (e.g. "lapack").
fn main() {
    println!("cargo:rerun-if-env-changed=CIRCLAW_LAPACK_LIB");
    println!("cargo:rerun-if-env-changed=CIRCLAW_LAPACK_DIR");
    if let Ok(dir) = std::env::var("CIRCLAW_LAPACK_DIR") {
        println!("cargo:rustc-link-search=native={dir}");
    }
    let lib = std::env::var("CIRCLAW_LAPACK_LIB").unwrap_or_else(|_| "openblas".to_string());
    println!("cargo:rustc-link-lib=dylib={lib}");
}
