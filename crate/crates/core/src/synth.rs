// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random SLTs for load tests and property checks.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::slt::{EdgeLabel, NodeId, Slt, SltBuilder, SymbolLabel};

/// A mix of variables, numbers, operators and containers.
pub fn default_alphabet() -> Vec<SymbolLabel> {
    [
        "V!a", "V!b", "V!c", "V!x", "V!y", "V!n", "V!i", "N!0", "N!1", "N!2", "N!3", "+", "−", "=",
        "×", ",", "F!", "R!", "M!()1x1", "M!()2x1", "T!lim", "∑",
    ]
    .into_iter()
    .map(SymbolLabel::new)
    .collect()
}

/// Random tree with `nodes` nodes. Each new node hangs off a random existing
/// node on a free edge, `next` being the most likely label.
pub fn random_slt<R: Rng + ?Sized>(rng: &mut R, nodes: usize, alphabet: &[SymbolLabel]) -> Slt {
    assert!(nodes >= 1, "an SLT has at least one node");
    let pick = |rng: &mut R| alphabet.choose(rng).expect("non-empty alphabet").clone();
    let mut builder = SltBuilder::new(pick(rng)).expect("alphabet has no reserved labels");
    let mut ids: Vec<NodeId> = vec![builder.root()];
    while ids.len() < nodes {
        let parent = *ids.choose(rng).expect("non-empty");
        let edge = if rng.gen_bool(0.5) {
            EdgeLabel::Next
        } else {
            *EdgeLabel::ALL.choose(rng).expect("non-empty")
        };
        if builder.has_child(parent, edge) {
            continue;
        }
        let id = builder
            .add_child(parent, edge, pick(rng))
            .expect("free edge slot");
        ids.push(id);
    }
    builder.finish()
}

/// Copy of `slt` with the labels of `count` distinct random nodes replaced
/// by wildcards `?w0`, `?w1`, ...
pub fn with_wildcards<R: Rng + ?Sized>(rng: &mut R, slt: &Slt, count: usize) -> Slt {
    let mut targets: Vec<NodeId> = slt.node_ids().collect();
    targets.shuffle(rng);
    targets.truncate(count);
    relabel(slt, |node| {
        targets
            .iter()
            .position(|&t| t == node)
            .map(|i| SymbolLabel::wildcard(&format!("w{i}")))
    })
}

/// Copy of `slt` where roughly `rate` of the labels are redrawn.
pub fn perturb<R: Rng + ?Sized>(rng: &mut R, slt: &Slt, rate: f64, alphabet: &[SymbolLabel]) -> Slt {
    let redraw: Vec<Option<SymbolLabel>> = slt
        .node_ids()
        .map(|_| rng.gen_bool(rate).then(|| alphabet.choose(rng).expect("non-empty").clone()))
        .collect();
    relabel(slt, |node| redraw[node].clone())
}

/// Rebuild `slt` with labels replaced where `replace` returns one.
pub fn relabel(slt: &Slt, mut replace: impl FnMut(NodeId) -> Option<SymbolLabel>) -> Slt {
    let mut label = |n: NodeId| replace(n).unwrap_or_else(|| slt.label(n).clone());
    let mut builder = SltBuilder::new(label(slt.root())).expect("valid label");
    let mut map = vec![0; slt.len()];
    for (parent, child, edge) in slt.edges() {
        map[child] = builder
            .add_child(map[parent], edge, label(child))
            .expect("edges of a valid tree");
    }
    builder.finish()
}

/// `count` random SLTs with sizes uniform in `sizes`.
pub fn corpus(seed: u64, count: usize, sizes: std::ops::RangeInclusive<usize>) -> Vec<Slt> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = default_alphabet();
    (0..count)
        .map(|_| {
            let n = rng.gen_range(sizes.clone());
            random_slt(&mut rng, n, &alphabet)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_trees_have_requested_size() {
        let trees = corpus(7, 50, 3..=15);
        assert!(trees.iter().all(|t| (3..=15).contains(&t.len())));
        assert_eq!(trees, corpus(7, 50, 3..=15));
        for t in &trees {
            let back = Slt::from_canonical(&t.canonical_string()).unwrap();
            assert_eq!(&back, t);
        }
    }

    #[test]
    fn wildcard_substitution() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_slt(&mut rng, 6, &default_alphabet());
        let w = with_wildcards(&mut rng, &t, 2);
        assert_eq!(w.len(), 6);
        assert_eq!(w.node_ids().filter(|&n| w.label(n).is_wildcard()).count(), 2);
    }
}
