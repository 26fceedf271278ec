fn main() {
    // The `eigen` feature uses LAPACK's zgeev via the system OpenBLAS
    // (which bundles LAPACK on Debian-family systems).
    if std::env::var_os("CARGO_FEATURE_EIGEN").is_some() {
        println!("cargo:rustc-link-lib=dylib=openblas");
    }
}
