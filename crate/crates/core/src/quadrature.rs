//! Gauss-Hermite nodes/weights and standard-normal helpers.
//!
//! Nodes and weights are for the weight function exp(-x^2) on the real
//! line, so E[f(Z)] for Z ~ N(0,1) is sum_j w_j f(sqrt(2) x_j) / sqrt(pi).
//! Computed by Newton iteration on the orthonormal Hermite recurrence;
//! accurate to ~1e-14 for the node counts used here (<= 128).

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.39894228040143267794;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF via the complementary error function (relative
/// accuracy holds deep into the lower tail, unlike 1 - Phi(-z) forms).
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Gauss-Hermite rule: returns (nodes, weights) for weight exp(-x^2).
///
/// Only the non-negative half is solved for; the rule is symmetric.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let m = (n + 1) / 2;
    let nf = n as f64;

    let mut z = 0.0f64;
    for i in 0..m {
        // initial guesses (largest root first), standard asymptotic seeds
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // orthonormal Hermite recurrence evaluated at z
            let mut p1 = std::f64::consts::PI.powf(-0.25);
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
