//! Classification metrics, all reported as percentages.

use super::EvalError;

pub fn overall_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64, EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let correct = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * correct as f64 / pred.len() as f64)
}

fn check_shape<A, B>(a: &[Vec<A>], b: &[Vec<B>]) -> Result<usize, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::ShapeMismatch);
    }
    let k = b.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != k) || b.iter().any(|r| r.len() != k) {
        return Err(EvalError::ShapeMismatch);
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

impl Counts {
    fn add(&mut self, pred: bool, truth: bool) {
        match (pred, truth) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => {}
        }
    }

    fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            100.0 * (2 * self.tp) as f64 / denom as f64
        }
    }
}

/// F1 over TP/FP/FN pooled across every (sample, class) pair; 0 when
/// there are no positives in either input.
pub fn micro_f1(pred: &[Vec<bool>], truth: &[Vec<bool>]) -> Result<f64, EvalError> {
    check_shape(pred, truth)?;
    let mut counts = Counts::default();
    for (p, t) in pred.iter().zip(truth) {
        for (&pb, &tb) in p.iter().zip(t) {
            counts.add(pb, tb);
        }
    }
    Ok(counts.f1())
}

/// Unweighted mean of per-class F1 (empty classes score 0).
pub fn macro_f1(pred: &[Vec<bool>], truth: &[Vec<bool>]) -> Result<f64, EvalError> {
    let k = check_shape(pred, truth)?;
    if k == 0 {
        return Ok(0.0);
    }
    let mut per_class = vec![Counts::default(); k];
    for (p, t) in pred.iter().zip(truth) {
        for (c, (&pb, &tb)) in p.iter().zip(t).enumerate() {
            per_class[c].add(pb, tb);
        }
    }
    Ok(per_class.iter().map(Counts::f1).sum::<f64>() / k as f64)
}

/// Uninterpolated average precision of one ranking, as a fraction. Samples
/// are ranked by descending score with ties broken by lower index. `None`
/// when there are no positives.
pub fn average_precision(scores: &[f64], truth: &[bool]) -> Option<f64> {
    let positives = truth.iter().filter(|&&t| t).count();
    if positives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut hits = 0usize;
    let mut ap = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if truth[i] {
            hits += 1;
            // recall steps by 1/P at each hit
            ap += hits as f64 / (rank + 1) as f64;
        }
    }
    Some(ap / positives as f64)
}

/// Mean over classes with at least one positive of per-class AP.
pub fn mean_average_precision(scores: &[Vec<f64>], truth: &[Vec<bool>]) -> Result<f64, EvalError> {
    let k = check_shape(scores, truth)?;
    let mut total = 0.0;
    let mut counted = 0usize;
    for c in 0..k {
        let s: Vec<f64> = scores.iter().map(|r| r[c]).collect();
        let t: Vec<bool> = truth.iter().map(|r| r[c]).collect();
        if let Some(ap) = average_precision(&s, &t) {
            total += ap;
            counted += 1;
        }
    }
    if counted == 0 {
        return Err(EvalError::NoPositives);
    }
    Ok(100.0 * total / counted as f64)
}
