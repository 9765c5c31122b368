//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use vmad::model::{Attempt, Dataset, Label};

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// (threshold, apcer, bpcer) at every distinct score plus the two
/// sentinels, each rate counted from scratch.
pub fn brute_det(bona: &[f64], morph: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut ts: Vec<f64> = bona.iter().chain(morph).copied().collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut all = vec![ts[0].next_down()];
    all.extend(&ts);
    all.push(ts[ts.len() - 1].next_up());
    all.into_iter()
        .map(|t| {
            let a = morph.iter().filter(|&&m| m <= t).count() as f64 / morph.len() as f64;
            let b = bona.iter().filter(|&&s| s > t).count() as f64 / bona.len() as f64;
            (t, a, b)
        })
        .collect()
}

/// EER from the first segment on which `apcer - bpcer` reaches zero.
pub fn brute_eer(points: &[(f64, f64, f64)]) -> f64 {
    for w in points.windows(2) {
        let (_, a0, b0) = w[0];
        let (_, a1, b1) = w[1];
        if a0 - b0 == 0.0 {
            return a0;
        }
        if a0 < b0 && a1 >= b1 {
            // Solve a0 + s (a1 - a0) = b0 + s (b1 - b0).
            let s = (b0 - a0) / ((a1 - a0) - (b1 - b0));
            return a0 + s * (a1 - a0);
        }
    }
    let (_, a, b) = points[points.len() - 1];
    assert_eq!(a, b, "no crossing");
    a
}

pub fn brute_bpcer_at(points: &[(f64, f64, f64)], alpha: f64) -> f64 {
    points.iter().filter(|p| p.1 <= alpha).map(|p| p.2).fold(1.0, f64::min)
}

/// Every document against every sequence, checked against the labeling
/// rules directly.
pub fn brute_pairs(ds: &Dataset) -> Vec<Attempt> {
    let mut out = Vec::new();
    for d in &ds.documents {
        for s in &ds.sequences {
            let ok = match d.label {
                Some(Label::BonaFide) => s.subject == d.subject_a,
                _ => s.subject == d.subject_a || d.subject_b.as_deref() == Some(s.subject.as_str()),
            };
            if ok {
                out.push(Attempt {
                    document: d.id.clone(),
                    sequence: s.id.clone(),
                    label: d.label,
                });
            }
        }
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
