use num_complex::Complex64;
use qmpst::quantum::QuantumState;

pub const TOL: f64 = 1e-9;

pub fn adjoint(m: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    (0..m.len())
        .map(|i| (0..m.len()).map(|j| m[j][i].conj()).collect())
        .collect()
}

pub fn close(a: &[Complex64], b: &[Complex64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < TOL)
}

/// Post-measurement state by enumerating basis strings, independent of the
/// bit arithmetic in the library.
pub fn brute_force(s: &QuantumState, targets: &[&str], outcome: &[u8]) -> (f64, Vec<String>, Vec<Complex64>) {
    let n = s.len();
    let pos: Vec<usize> = targets
        .iter()
        .map(|t| s.qubits().iter().position(|q| q == t).unwrap())
        .collect();
    let keep: Vec<usize> = (0..n).filter(|i| !pos.contains(i)).collect();
    let want: String = outcome.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
    let mut p = 0.0;
    let mut kept: Vec<(String, Complex64)> = Vec::new();
    for (i, a) in s.amplitudes().iter().enumerate() {
        let bits: Vec<char> = format!("{i:0n$b}").chars().collect();
        let got: String = pos.iter().map(|&j| bits[j]).collect();
        if got == want {
            p += a.norm_sqr();
            kept.push((keep.iter().map(|&j| bits[j]).collect(), *a));
        }
    }
    kept.sort_by(|x, y| x.0.cmp(&y.0));
    let amps = kept.into_iter().map(|(_, a)| a / p.sqrt()).collect();
    let names = keep.iter().map(|&j| s.qubits()[j].clone()).collect();
    (p, names, amps)
}
