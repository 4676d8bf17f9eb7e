use std::time::Instant;
use weylham::catalog::{claims, load_catalog, report, DEFAULT_CATALOG};
fn main() {
    let cat = load_catalog(DEFAULT_CATALOG).unwrap();
    for c in cat.claims.clone() {
        eprintln!(">> {}", c.id);
        let t = Instant::now();
        let r = claims::run_one(&cat, &c);
        eprintln!("{} ({:?})", report::text_line(&r), t.elapsed());
    }
}
