//! Sequence acceleration and tail tests along geometric schedules.

use num_complex::Complex64;

/// Wynn's epsilon algorithm; returns the deepest even-column estimate.
///
/// Columns that would divide by a vanishing difference are cut off, so an
/// already-converged sequence returns its last term.
pub fn wynn(seq: &[Complex64]) -> Complex64 {
    let n = seq.len();
    if n == 0 {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    if n < 3 {
        return seq[n - 1];
    }
    let scale = seq.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut prev: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = seq.to_vec();
    let mut best = seq[n - 1];
    let mut col = 0usize;
    loop {
        if cur.len() < 2 {
            break;
        }
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            let tiny = if col.is_multiple_of(2) { 1e-15 * scale } else { 0.0 };
            if d.norm() <= tiny || !d.is_finite() {
                return best;
            }
            next.push(prev[j + 1] + 1.0 / d);
        }
        col += 1;
        if col.is_multiple_of(2) {
            let cand = next[next.len() - 1];
            if !cand.is_finite() {
                return best;
            }
            best = cand;
        }
        prev = cur;
        cur = next;
    }
    best
}

pub fn wynn_real(seq: &[f64]) -> f64 {
    let c: Vec<Complex64> = seq.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    wynn(&c).re
}

/// Extrapolated limits of the prefixes `seq[..k]` for `k = 3..=n`.
pub fn prefix_limits(seq: &[Complex64]) -> Vec<Complex64> {
    (3..=seq.len()).map(|k| wynn(&seq[..k])).collect()
}

/// Outcome of a tail-increment convergence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailVerdict {
    /// Increments decay geometrically; value is the extrapolated limit.
    Convergent(f64),
    Divergent,
    Inconclusive,
}

/// Decide convergence of a nondecreasing sequence of partial integrals.
///
/// Convergent when the last `sustain` increment ratios all stay below `factor`;
/// divergent when the final ratios stay at or above one.
pub fn tail_test(partial: &[f64], factor: f64, sustain: usize) -> TailVerdict {
    tail_test_with_floor(partial, factor, sustain, 1e-13)
}

/// [`tail_test`] treating increments below `rel_floor` times the partial sums as zero.
pub fn tail_test_with_floor(partial: &[f64], factor: f64, sustain: usize, rel_floor: f64) -> TailVerdict {
    if partial.iter().any(|v| v.is_infinite()) {
        return TailVerdict::Divergent;
    }
    if partial.len() < sustain + 2 {
        return TailVerdict::Inconclusive;
    }
    let inc: Vec<f64> = partial
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d.abs() <= rel_floor * w[0].abs().max(w[1].abs()) {
                0.0
            } else {
                d
            }
        })
        .collect();
    let ratios: Vec<f64> = inc
        .windows(2)
        .map(|w| if w[0].abs() > 0.0 { w[1] / w[0] } else if w[1] == 0.0 { 0.0 } else { f64::INFINITY })
        .collect();
    let tail = &ratios[ratios.len() - sustain..];
    let last = *partial.last().unwrap();
    if tail.iter().all(|r| r.abs() < factor) {
        let r = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let extra = inc.last().unwrap() * r / (1.0 - r);
        return TailVerdict::Convergent(last + extra);
    }
    if tail[sustain - 2..].iter().all(|r| *r >= 0.97) {
        return TailVerdict::Divergent;
    }
    TailVerdict::Inconclusive
}

/// Least-squares line `y = c0 + c1 t`; returns `(c0, c1, rms residual)`.
pub fn line_fit(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|v| (v - mt) * (v - mt)).sum();
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let c1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c0 = my - c1 * mt;
    let rms = (t.iter().zip(y).map(|(a, b)| (b - c0 - c1 * a).powi(2)).sum::<f64>() / n).sqrt();
    (c0, c1, rms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wynn_sums_geometric_components() {
        let seq: Vec<Complex64> = (0..8)
            .map(|k| {
                let k = k as f64;
                Complex64::new(2.0 + 0.7f64.powf(k) - 0.3 * 0.5f64.powf(k), -1.0 + 0.2 * 0.8f64.powf(k))
            })
            .collect();
        let l = wynn(&seq);
        assert!((l - Complex64::new(2.0, -1.0)).norm() < 1e-10, "{l}");
    }

    #[test]
    fn wynn_on_converged_sequence() {
        let seq = vec![Complex64::new(1.0, 0.0); 6];
        assert_eq!(wynn(&seq), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn tail_test_verdicts() {
        let conv: Vec<f64> = (0..8).map(|k| 1.0 - 0.5f64.powi(k)).collect();
        match tail_test(&conv, 0.9, 4) {
            TailVerdict::Convergent(v) => assert!((v - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let div: Vec<f64> = (0..8).map(|k| 2f64.powi(k)).collect();
        assert_eq!(tail_test(&div, 0.9, 4), TailVerdict::Divergent);
        let flat: Vec<f64> = (0..8).map(|k| 1.0 - 1e-30 * (k % 3) as f64).collect();
        assert_eq!(tail_test(&flat, 0.9, 4), TailVerdict::Convergent(1.0));
        let log: Vec<f64> = (0..8).map(|k| k as f64).collect();
        assert_eq!(tail_test(&log, 0.9, 4), TailVerdict::Divergent);
        assert_eq!(tail_test(&[1.0, 2.0], 0.9, 4), TailVerdict::Inconclusive);
    }

    #[test]
    fn line_fit_exact() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (a, b, r) = line_fit(&t, &y);
        assert!((a - 1.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14 && r < 1e-14);
    }
}
