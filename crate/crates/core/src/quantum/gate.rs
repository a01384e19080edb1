use num_complex::Complex64;

use crate::syntax::Gate;

/// Row-major unitary of a gate; the first target is the most significant bit.
pub fn matrix(g: Gate) -> Vec<Vec<Complex64>> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let r = |x: f64| c(x, 0.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        Gate::H => vec![vec![r(s), r(s)], vec![r(s), r(-s)]],
        Gate::X => vec![vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]],
        Gate::Y => vec![vec![r(0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), r(0.0)]],
        Gate::Z => vec![vec![r(1.0), r(0.0)], vec![r(0.0), r(-1.0)]],
        Gate::I => vec![vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]],
        Gate::Ry(theta) => {
            let (sn, cs) = (theta / 2.0).sin_cos();
            vec![vec![r(cs), r(-sn)], vec![r(sn), r(cs)]]
        }
        Gate::Cnot => permutation(4, |i| if i >= 2 { i ^ 1 } else { i }),
        Gate::Cswap => permutation(8, |i| match i {
            5 => 6,
            6 => 5,
            i => i,
        }),
    }
}

fn permutation(n: usize, f: impl Fn(usize) -> usize) -> Vec<Vec<Complex64>> {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[f(i)] = Complex64::new(1.0, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_unitary() {
        for g in [Gate::H, Gate::X, Gate::Y, Gate::Z, Gate::I, Gate::Cnot, Gate::Cswap, Gate::Ry(0.7)] {
            let m = matrix(g);
            let n = m.len();
            assert_eq!(n, 1 << g.arity());
            for i in 0..n {
                for j in 0..n {
                    let dot: Complex64 = (0..n).map(|k| m[k][i].conj() * m[k][j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).norm() < 1e-12);
                }
            }
        }
    }
}
