//! Small dense/matrix-free helpers shared by the oracles.

use num_complex::Complex64;

/// `exp(t A) v` for a linear map given by `apply(x, out)` (writes `A x` into
/// `out`), using a Taylor series on sub-steps of size `h` with `h * norm_bound <= 1/2`.
///
/// Terms are summed until they drop below `1e-17` of the running sum, so the
/// result is exact to roundoff for the moderate norms used here.
pub fn expmv<F>(apply: F, v: &[Complex64], t: f64, norm_bound: f64) -> Vec<Complex64>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let steps = ((t.abs() * norm_bound) / 0.5).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut x = v.to_vec();
    let mut term = vec![Complex64::new(0.0, 0.0); v.len()];
    let mut next = vec![Complex64::new(0.0, 0.0); v.len()];
    for _ in 0..steps {
        term.copy_from_slice(&x);
        let mut sum = x.clone();
        for n in 1..60 {
            apply(&term, &mut next);
            let scale = h / n as f64;
            let mut term_norm = 0.0f64;
            for (t_i, n_i) in term.iter_mut().zip(next.iter()) {
                *t_i = *n_i * scale;
                term_norm = term_norm.max(t_i.norm());
            }
            for (s, t_i) in sum.iter_mut().zip(term.iter()) {
                *s += *t_i;
            }
            let sum_norm = sum.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            if term_norm <= 1e-17 * sum_norm.max(1e-300) {
                break;
            }
        }
        x = sum;
    }
    x
}

/// Euclidean norm of a complex vector.
pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// In-place Walsh–Hadamard transform: `out[m] = sum_x in[x] (-1)^{popcount(x & m)}`.
pub fn walsh_hadamard(v: &mut [Complex64]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn expmv_of_rotation_generator() {
        // A = [[0, -1], [1, 0]] rotates (1, 0) to (cos t, sin t).
        let apply = |x: &[Complex64], out: &mut [Complex64]| {
            out[0] = -x[1];
            out[1] = x[0];
        };
        let v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let r = expmv(apply, &v, 7.3, 1.0);
        assert_abs_diff_eq!(r[0].re, 7.3f64.cos(), epsilon = 1e-13);
        assert_abs_diff_eq!(r[1].re, 7.3f64.sin(), epsilon = 1e-13);
    }

    #[test]
    fn walsh_hadamard_of_delta_is_flat() {
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[0] = Complex64::new(1.0, 0.0);
        walsh_hadamard(&mut v);
        assert!(v.iter().all(|z| (*z - 1.0).norm() < 1e-15));
        let mut w = vec![Complex64::new(0.0, 0.0); 4];
        w[3] = Complex64::new(1.0, 0.0);
        walsh_hadamard(&mut w);
        let signs: Vec<f64> = w.iter().map(|z| z.re).collect();
        assert_eq!(signs, vec![1.0, -1.0, -1.0, 1.0]);
    }
}
