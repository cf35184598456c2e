//! Reproducibility of the scan on a decomposed Cantor measure.

use salem_patterns::fourier::{cell_averages, decompose, fourier_coeffs};
use salem_patterns::measures::{cantor_measure, CantorSpec, MeasureConditions};
use salem_patterns::trilinear::{scale_scan, ScanParams};
use salem_patterns::Polynomial;

#[test]
fn cantor_mu1_scan_certifies_and_reruns_bit_identically() {
    let mu = cantor_measure(&CantorSpec::middle_thirds(8), 13).unwrap();
    let cond = MeasureConditions::new(0.6, 0.5, 2.0, 1.0, 1.0).unwrap();
    let d = decompose(&fourier_coeffs(&mu, 512).unwrap(), &cond, 16.0).unwrap();
    let f = cell_averages(&d.mu1, 13).unwrap();
    let p = Polynomial::t_plus_t2();
    let a = scale_scan(&f, &p, &ScanParams::new(2)).unwrap();
    let b = scale_scan(&f, &p, &ScanParams::new(2)).unwrap();
    assert!(a.certified_scale.is_some());
    assert!(a.dichotomy_holds() && a.energy_identity_holds());
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}
