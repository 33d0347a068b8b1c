use crate::plant::RunRecord;

/// `rms(truth - model) / std(truth)`; the mean error counts.
pub fn nrmse(truth: &[f64], model: &[f64]) -> f64 {
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let spread = (truth.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let err = (truth
        .iter()
        .zip(model)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    err / spread
}

/// Per-channel NRMSE of `predicted` against the recorded outputs of `run`
/// over samples with `window.0 <= t <= window.1`.
pub fn tracking_nrmse(run: &RunRecord, predicted: &[[f64; 3]], window: (f64, f64)) -> [f64; 3] {
    let eps = 1e-9 * run.dt_out;
    let idx: Vec<usize> = (0..run.len().min(predicted.len()))
        .filter(|&k| run.t[k] >= window.0 - eps && run.t[k] <= window.1 + eps)
        .collect();
    let mut out = [0.0; 3];
    for (ch, o) in out.iter_mut().enumerate() {
        let a: Vec<f64> = idx.iter().map(|&k| run.y[k][ch]).collect();
        let b: Vec<f64> = idx.iter().map(|&k| predicted[k][ch]).collect();
        *o = nrmse(&a, &b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_mean_predictions() {
        let truth = [1.0, 3.0, 1.0, 3.0];
        assert_eq!(nrmse(&truth, &truth), 0.0);
        assert!((nrmse(&truth, &[2.0; 4]) - 1.0).abs() < 1e-15);
    }
}
