//! Multiplier quadrature against the stationary-phase leading term, and
//! the calibration of the remainder constant.

use salem_patterns::oscillatory::{
    calibrate_error_constant, multiplier_quadrature_tol, stationary_phase, xi_for_critical_point,
    SP_ERROR_CONSTANT,
};
use salem_patterns::Polynomial;

fn main() {
    let polys = [
        Polynomial::parse("1:2").unwrap(),
        Polynomial::t_plus_t2(),
        Polynomial::parse("1:1, 1:3").unwrap(),
    ];
    let c = calibrate_error_constant(&polys, &[2, 4], 2.0);
    println!("calibrated remainder constant (2x safety): {c:.6e}, frozen: {SP_ERROR_CONSTANT:.6e}");

    println!("{:>10} {:>2} {:>6} {:>10} {:>12} {:>8}", "P", "l", "t_c", "eta", "|err|*eta", "ratio");
    for p in &polys {
        for l in [2, 4] {
            for t_c in [1.3, 1.5, 1.7] {
                for eta in [1e3, 1e4, -1e4, 1e5] {
                    let xi = xi_for_critical_point(t_c, eta, l, p);
                    let sp = stationary_phase(xi, eta, l, p).unwrap();
                    let q = multiplier_quadrature_tol(xi, eta, l, p, 1e-12);
                    let ratio = q.value.norm() * eta.abs().sqrt() / sp.amplitude.norm();
                    println!(
                        "{:>10} {l:>2} {t_c:>6} {eta:>10.0e} {:>12.4e} {ratio:>8.4}",
                        p.to_string(),
                        (q.value - sp.leading).norm() * eta.abs()
                    );
                }
            }
        }
    }
}
