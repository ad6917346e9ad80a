//! Run the built-in self checks: quadrature against closed forms, the
//! correction factor, Erlang moments, assignment and k-NN search.

fn main() {
    let mut failed = 0;
    for c in distdiv::oracle::run_suite() {
        println!("{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    std::process::exit(i32::from(failed > 0));
}
