// nalgebra-lapack is built with `lapack-custom`; link the system LAPACK/BLAS.
fn main() {
    println!("cargo:rustc-link-lib=lapack");
    println!("cargo:rustc-link-lib=blas");
}
