//! Brute-force oracles for the acceptance suite: each measure evaluated
//! by direct enumeration of its set definition over raw matrices, never
//! through the library's counting paths. Skip rules and reduction order
//! mirror the definitions (rows then columns in index order) so agreement
//! with the library must be bitwise.

use ndarray::Array2;

fn rank(row: &[f64], j: usize) -> usize {
    let mut r = 1;
    for (k, &v) in row.iter().enumerate() {
        if v > row[j] || (v == row[j] && k < j) {
            r += 1;
        }
    }
    r
}

fn row_of(f: &Array2<f64>, i: usize) -> Vec<f64> {
    f.row(i).to_vec()
}

pub fn hamming_loss(h: &Array2<u8>, y: &Array2<u8>) -> f64 {
    let (m, l) = y.dim();
    let mut wrong = 0usize;
    for i in 0..m {
        for j in 0..l {
            if h[(i, j)] != y[(i, j)] {
                wrong += 1;
            }
        }
    }
    wrong as f64 / (m * l) as f64
}

pub fn ranking_loss(f: &Array2<f64>, y: &Array2<u8>) -> Option<f64> {
    let (m, l) = y.dim();
    let mut sum = 0.0;
    let mut eligible = 0usize;
    for i in 0..m {
        let pos: Vec<usize> = (0..l).filter(|&j| y[(i, j)] == 1).collect();
        let neg: Vec<usize> = (0..l).filter(|&j| y[(i, j)] == 0).collect();
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut reversed = 0usize;
        for &u in &pos {
            for &v in &neg {
                if f[(i, u)] <= f[(i, v)] {
                    reversed += 1;
                }
            }
        }
        sum += reversed as f64 / (pos.len() * neg.len()) as f64;
        eligible += 1;
    }
    (eligible > 0).then(|| sum / eligible as f64)
}

pub fn one_error(f: &Array2<f64>, y: &Array2<u8>) -> Option<f64> {
    let (m, l) = y.dim();
    let mut errors = 0usize;
    let mut eligible = 0usize;
    for i in 0..m {
        if (0..l).all(|j| y[(i, j)] == 0) {
            continue;
        }
        let row = row_of(f, i);
        let mut best = 0usize;
        for k in 1..l {
            if row[k] > row[best] {
                best = k;
            }
        }
        if y[(i, best)] == 0 {
            errors += 1;
        }
        eligible += 1;
    }
    (eligible > 0).then(|| errors as f64 / eligible as f64)
}

pub fn coverage(f: &Array2<f64>, y: &Array2<u8>) -> Option<f64> {
    let (m, l) = y.dim();
    let mut sum = 0.0;
    let mut eligible = 0usize;
    for i in 0..m {
        let row = row_of(f, i);
        let worst = (0..l)
            .filter(|&j| y[(i, j)] == 1)
            .map(|j| rank(&row, j))
            .max();
        if let Some(worst) = worst {
            sum += (worst - 1) as f64;
            eligible += 1;
        }
    }
    (eligible > 0).then(|| sum / eligible as f64)
}

pub fn average_precision(f: &Array2<f64>, y: &Array2<u8>) -> Option<f64> {
    let (m, l) = y.dim();
    let mut sum = 0.0;
    let mut eligible = 0usize;
    for i in 0..m {
        let pos: Vec<usize> = (0..l).filter(|&j| y[(i, j)] == 1).collect();
        if pos.is_empty() {
            continue;
        }
        let row = row_of(f, i);
        let mut row_sum = 0.0;
        for &j in &pos {
            let rj = rank(&row, j);
            let mut within = 0usize;
            for &k in &pos {
                if rank(&row, k) <= rj {
                    within += 1;
                }
            }
            row_sum += within as f64 / rj as f64;
        }
        sum += row_sum / pos.len() as f64;
        eligible += 1;
    }
    (eligible > 0).then(|| sum / eligible as f64)
}

pub fn macro_f1(h: &Array2<u8>, y: &Array2<u8>) -> f64 {
    let (m, l) = y.dim();
    let mut sum = 0.0;
    for j in 0..l {
        let mut tp = 0u64;
        let mut den = 0u64;
        for i in 0..m {
            tp += (y[(i, j)] * h[(i, j)]) as u64;
            den += (y[(i, j)] + h[(i, j)]) as u64;
        }
        sum += if den == 0 { 1.0 } else { 2.0 * tp as f64 / den as f64 };
    }
    sum / l as f64
}

pub fn instance_f1(h: &Array2<u8>, y: &Array2<u8>) -> f64 {
    let (m, l) = y.dim();
    let mut sum = 0.0;
    for i in 0..m {
        let mut tp = 0u64;
        let mut den = 0u64;
        for j in 0..l {
            tp += (y[(i, j)] * h[(i, j)]) as u64;
            den += (y[(i, j)] + h[(i, j)]) as u64;
        }
        sum += if den == 0 { 1.0 } else { 2.0 * tp as f64 / den as f64 };
    }
    sum / m as f64
}

pub fn micro_f1(h: &Array2<u8>, y: &Array2<u8>) -> Option<f64> {
    let (m, l) = y.dim();
    let mut tp = 0u64;
    let mut den = 0u64;
    for i in 0..m {
        for j in 0..l {
            tp += (y[(i, j)] * h[(i, j)]) as u64;
            den += (y[(i, j)] + h[(i, j)]) as u64;
        }
    }
    (den > 0).then(|| 2.0 * tp as f64 / den as f64)
}

pub fn macro_auc(f: &Array2<f64>, y: &Array2<u8>) -> Option<f64> {
    let (m, l) = y.dim();
    let mut sum = 0.0;
    let mut eligible = 0usize;
    for j in 0..l {
        let pos: Vec<usize> = (0..m).filter(|&i| y[(i, j)] == 1).collect();
        let neg: Vec<usize> = (0..m).filter(|&i| y[(i, j)] == 0).collect();
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut correct = 0usize;
        for &a in &pos {
            for &b in &neg {
                if f[(a, j)] >= f[(b, j)] {
                    correct += 1;
                }
            }
        }
        sum += correct as f64 / (pos.len() * neg.len()) as f64;
        eligible += 1;
    }
    (eligible > 0).then(|| sum / eligible as f64)
}

pub fn instance_auc(f: &Array2<f64>, y: &Array2<u8>) -> Option<f64> {
    let (m, l) = y.dim();
    let mut sum = 0.0;
    let mut eligible = 0usize;
    for i in 0..m {
        let pos: Vec<usize> = (0..l).filter(|&j| y[(i, j)] == 1).collect();
        let neg: Vec<usize> = (0..l).filter(|&j| y[(i, j)] == 0).collect();
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut correct = 0usize;
        for &u in &pos {
            for &v in &neg {
                if f[(i, u)] >= f[(i, v)] {
                    correct += 1;
                }
            }
        }
        sum += correct as f64 / (pos.len() * neg.len()) as f64;
        eligible += 1;
    }
    (eligible > 0).then(|| sum / eligible as f64)
}

pub fn micro_auc(f: &Array2<f64>, y: &Array2<u8>) -> Option<f64> {
    let (m, l) = y.dim();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in 0..m {
        for j in 0..l {
            if y[(i, j)] == 1 {
                pos.push(f[(i, j)]);
            } else {
                neg.push(f[(i, j)]);
            }
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut correct = 0u64;
    for &p in &pos {
        for &n in &neg {
            if p >= n {
                correct += 1;
            }
        }
    }
    Some(correct as f64 / (pos.len() as f64 * neg.len() as f64))
}

/// Objective value recomputed pair by pair with per-pair dot products
/// (no precomputed score matrix).
pub fn objective(
    w: &Array2<f64>,
    x: &Array2<f64>,
    y: &Array2<u8>,
    lambda1: f64,
    lambda2: f64,
) -> f64 {
    let (m, l) = y.dim();
    let d = x.ncols();
    let dot = |i: usize, j: usize| -> f64 { (0..d).map(|k| x[(i, k)] * w[(k, j)]).sum() };
    let mut obj: f64 = w.iter().map(|v| v * v).sum();
    for i in 0..m {
        for u in 0..l {
            for v in 0..l {
                if y[(i, u)] == 1 && y[(i, v)] == 0 {
                    obj += lambda1 * (1.0 - (dot(i, u) - dot(i, v))).max(0.0);
                }
            }
        }
    }
    for j in 0..l {
        for a in 0..m {
            for b in 0..m {
                if y[(a, j)] == 1 && y[(b, j)] == 0 {
                    obj += lambda2 * (1.0 - (dot(a, j) - dot(b, j))).max(0.0);
                }
            }
        }
    }
    obj
}
