//! Bessel functions of the first kind for integer order.
//!
//! All orders `0..=n` at one argument come from a single backward (Miller)
//! recurrence normalized with `J_0 + 2 Σ J_{2k} = 1`, which is stable for
//! every order and accurate to a few ulps for moderate arguments.

/// `J_0(x), …, J_{max_order}(x)`.
pub fn bessel_j_table(max_order: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    // start well above both the requested order and the argument
    let top = max_order.max(ax as usize);
    let mut start = top + 20 + (40.0 * (top as f64 + 1.0)).sqrt() as usize;
    start += start % 2;

    let mut j_next = 0.0; // J_{m+1}
    let mut j_cur = 1e-300; // J_m, arbitrary seed
    let mut norm = 0.0;
    for m in (1..=start).rev() {
        // J_{m-1} = (2m/x) J_m − J_{m+1}
        let j_prev = 2.0 * m as f64 / ax * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        let order = m - 1;
        if order <= max_order {
            out[order] = j_cur;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j_cur; // J_0
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{−n} = (−1)^n J_n`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let v = bessel_j_table(order, x)[order];
    if n < 0 && order % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Coefficients `J_p(x)` for `p = −order..=order`, element `p + order`.
pub fn jacobi_anger_terms(x: f64, order: usize) -> Vec<f64> {
    let pos = bessel_j_table(order, x);
    let mut out = vec![0.0; 2 * order + 1];
    for p in 0..=order {
        out[order + p] = pos[p];
        out[order - p] = if p % 2 == 1 { -pos[p] } else { pos[p] };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    /// Ascending power series; fine for small |x|.
    fn series(n: u32, x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for m in 1..60 {
            term *= -half * half / (m as f64 * (m + n) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn reference_values() {
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_6),
            (1, 1.0, 0.440_050_585_744_933_5),
            (2, 1.0, 0.114_903_484_931_900_5),
            (0, 10.0, -0.245_935_764_451_348_3),
            (1, 10.0, 0.043_472_746_168_861_44),
            (5, 10.0, -0.234_061_528_186_793_6),
        ];
        for (n, x, v) in cases {
            assert!((bessel_j(n, x) - v).abs() < 1e-14, "J_{n}({x})");
        }
    }

    #[test]
    fn agrees_with_series_at_small_argument() {
        for &x in &[1e-4, 0.01, 0.1, 0.5, 2.0] {
            for n in 0..10 {
                let a = bessel_j(n as i32, x);
                let b = series(n, x);
                assert!(
                    (a - b).abs() <= 1e-15 + 1e-13 * b.abs(),
                    "n={n} x={x}: {a} vs {b}"
                );
            }
        }
        assert!((bessel_j(2, 0.01) - 1.249_989_583_365_89e-5).abs() < 1e-18);
    }

    #[test]
    fn negative_order_and_argument() {
        for p in 0..8 {
            let s = if p % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(bessel_j(-p, 0.7), s * bessel_j(p, 0.7));
            assert_eq!(bessel_j(p, -0.7), s * bessel_j(p, 0.7));
        }
        let t = jacobi_anger_terms(0.3, 6);
        for p in 0..=6usize {
            let s = if p % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(t[6 - p], s * t[6 + p]);
            assert!((t[6 - p] - bessel_j(-(p as i32), 0.3)).abs() < 1e-16);
        }
    }

    #[test]
    fn jacobi_anger_identity() {
        let x = 1.3;
        let terms = jacobi_anger_terms(x, 30);
        for i in 0..16 {
            let th = i as f64 * 0.41;
            let mut sum = Complex64::new(0.0, 0.0);
            for (idx, jp) in terms.iter().enumerate() {
                let p = idx as i32 - 30;
                sum += Complex64::i().powi(p) * jp * Complex64::from_polar(1.0, p as f64 * th);
            }
            let exact = Complex64::from_polar(1.0, x * th.cos());
            assert!((sum - exact).norm() < 1e-14);
        }
    }
}
