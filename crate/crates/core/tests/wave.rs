use std::f64::consts::PI;

use bbnf_core::domain::{BoundaryCurve, Ellipse};
use bbnf_core::wave::{spectrum_below, MpsOptions};

#[test]
fn ellipse_counting_function_follows_weyl() {
    let e = Ellipse::new(1.0, 0.75).unwrap();
    let k = 60.0;
    let spec = spectrum_below(&e, k, &MpsOptions::default()).unwrap();
    let lambda = k * k;
    let area = PI * 0.75;
    let weyl = area / (4.0 * PI) * lambda;
    let n = spec.count_below(lambda) as f64;
    assert!(n >= 200.0);
    assert!(((n - weyl) / weyl).abs() < 0.05, "N = {n}, Weyl {weyl}");
    // the boundary correction −|∂Ω|√Λ/4π accounts for most of the deficit
    let m = 4096;
    let perimeter: f64 = (0..m)
        .map(|i| {
            let d = e.point(i as f64 / m as f64).d1;
            d[0].hypot(d[1]) / m as f64
        })
        .sum();
    let two_term = weyl - perimeter * k / (4.0 * PI);
    assert!((n - two_term).abs() < 0.01 * weyl, "N = {n}, two-term {two_term}");
    assert!(spec.max_residual() < 1e-8);
}
