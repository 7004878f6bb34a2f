use std::path::Path;

// netlib-src asks the linker for -lcblas, which Debian does not ship as a
// separate library; openblas exports the full cblas interface, so point the
// linker at it.
fn main() {
    let out = std::env::var("OUT_DIR").unwrap();
    let link = Path::new(&out).join("libcblas.so");
    if !link.exists() {
        std::os::unix::fs::symlink("/usr/lib/x86_64-linux-gnu/libopenblas.so", &link).unwrap();
    }
    println!("cargo:rustc-link-search=native={}", out);
}
