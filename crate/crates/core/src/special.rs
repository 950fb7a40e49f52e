//! Special functions not provided by `libm`.

use num_traits::Float;

/// Modified Bessel function of the second kind `K_ν(r)` for real `ν` and
/// `r > 0`, from `K_ν(r) = ∫₀^∞ exp(-r cosh t) cosh(νt) dt`.
///
/// The integrand is even and analytic, so the trapezoid rule converges
/// geometrically; the step is halved until two passes agree to 1e-15.
pub fn bessel_k(nu: f64, r: f64) -> f64 {
    debug_assert!(r > 0.0);
    let nu = nu.abs();
    // Scale out e^{-r} so large r does not underflow before the final product.
    let term = |t: f64| (-r * (t.cosh() - 1.0) + nu * t).exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp());
    let trapezoid = |h: f64| {
        let mut sum = 0.5 * term(0.0);
        let mut m = 1;
        loop {
            let t = m as f64 * h;
            let v = term(t);
            sum += v;
            // Past the peak of the integrand the terms decay super-exponentially.
            if v < 1e-18 * sum && r * t.sinh() > nu {
                break;
            }
            m += 1;
        }
        sum * h
    };
    let mut h = 0.5;
    let mut prev = trapezoid(h);
    loop {
        h *= 0.5;
        let next = trapezoid(h);
        if (next - prev).abs() <= 1e-15 * next.abs() || h < 1e-4 {
            return next * (-r).exp();
        }
        prev = next;
    }
}

/// Riemann zeta for real `s < 1`, through the Dirichlet eta function with
/// Borwein's accelerated alternating series.
pub fn zeta(s: f64) -> f64 {
    debug_assert!(s < 1.0);
    const TERMS: usize = 40;
    let n = TERMS as f64;
    // d_k = n Σ_{i≤k} (n+i-1)! 4^i / ((n-i)! (2i)!)
    let mut d = [0.0; TERMS + 1];
    let mut term = 1.0;
    let mut acc = 0.0;
    for (i, slot) in d.iter_mut().enumerate() {
        acc += term;
        *slot = acc;
        let fi = i as f64;
        term *= 4.0 * (n + fi) * (n - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
    }
    let dn = d[TERMS];
    let mut eta = 0.0;
    for (k, &dk) in d.iter().enumerate().take(TERMS) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        eta += sign * (dk - dn) / ((k + 1) as f64).powf(s);
    }
    eta = -eta / dn;
    eta / (1.0 - 2.0.powf(1.0 - s))
}
