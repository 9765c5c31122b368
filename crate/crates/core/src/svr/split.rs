use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Attempt, Label};

/// Label-stratified, document-grouped split into (train, test).
///
/// Attempts sharing a document always land on the same side. Within each
/// label, documents are shuffled under `seed` and assigned to the training
/// side while doing so moves its attempt count closer to
/// `fraction * attempts`. Both outputs keep the input order.
pub fn split_dataset(attempts: &[Attempt], fraction: f64, seed: u64) -> Result<(Vec<Attempt>, Vec<Attempt>)> {
    if attempts.is_empty() {
        return Err(Error::TooFewAttempts("no attempts".into()));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split fraction {fraction} outside (0, 1)"
        )));
    }
    // Documents per label, in first-appearance order.
    let mut groups: BTreeMap<Label, Vec<(&str, usize)>> = BTreeMap::new();
    for a in attempts {
        let label = a.label.ok_or_else(|| Error::MissingLabel(a.id()))?;
        let docs = groups.entry(label).or_default();
        match docs.iter_mut().find(|(d, _)| *d == a.document) {
            Some((_, n)) => *n += 1,
            None => docs.push((a.document.as_str(), 1)),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_docs = HashSet::new();
    for (label, mut docs) in groups {
        if docs.len() < 2 {
            return Err(Error::TooFewAttempts(format!(
                "label `{label}` has {} document(s); need at least 2",
                docs.len()
            )));
        }
        let total: usize = docs.iter().map(|(_, n)| n).sum();
        let target = fraction * total as f64;
        docs.shuffle(&mut rng);
        let mut chosen = vec![false; docs.len()];
        let mut train_count = 0usize;
        for (i, (_, n)) in docs.iter().enumerate() {
            let with = ((train_count + n) as f64 - target).abs();
            let without = (train_count as f64 - target).abs();
            if with <= without {
                chosen[i] = true;
                train_count += n;
            }
        }
        // Each side keeps at least one document of every label.
        if !chosen.iter().any(|&c| c) {
            chosen[0] = true;
        }
        if chosen.iter().all(|&c| c) {
            chosen[docs.len() - 1] = false;
        }
        train_docs.extend(docs.iter().zip(&chosen).filter(|(_, &c)| c).map(|((d, _), _)| *d));
    }
    Ok(attempts
        .iter()
        .cloned()
        .partition(|a| train_docs.contains(a.document.as_str())))
}
