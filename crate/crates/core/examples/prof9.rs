use std::time::Instant;
use qjacobi_core::qcalc::{qpoch_inf, QBase};
use qjacobi_core::scalar::rat;

fn main() {
    let base = QBase::new(rat(2, 3)).unwrap();
    let tol = rat(1, 10_000_000_000_000_000);
    for (label, c) in [("abq^2 = -4/27", rat(-4, 27)), ("aq = 2/9", rat(2, 9))] {
        let t = Instant::now();
        let e = qpoch_inf(&c, &base, &tol).unwrap();
        println!("{label}: {:.3?}  mid digits ~{}", t.elapsed(), e.mid().numer().to_string().len());
    }
}
