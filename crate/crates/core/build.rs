fn main() {
    // Name of the system LAPACK library to link; override with TCDLR_LAPACK.
    println!("cargo:rerun-if-env-changed=TCDLR_LAPACK");
    let lib = std::env::var("TCDLR_LAPACK").unwrap_or_else(|_| "lapack".into());
    println!("cargo:rustc-link-lib=dylib={lib}");
}
