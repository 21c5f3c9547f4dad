use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::store::FeatureSet;

/// Indices of one sampled (anchor, positive, negative) triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

/// Precomputed identity index over a labeled training set.
///
/// * anchor: uniform over labeled images whose identity has at least one
///   other image;
/// * positive: uniform over the anchor identity's other images;
/// * negative: uniform over labeled images of any other identity.
///
/// Cameras are not constrained. Each draw consumes exactly three values from
/// the generator, so a sequence is fully determined by the seed.
#[derive(Debug, Clone)]
pub struct TripletSampler {
    labeled: Vec<usize>,
    by_identity: BTreeMap<i64, Vec<usize>>,
    anchors: Vec<usize>,
}

impl TripletSampler {
    pub fn new(train: &FeatureSet) -> Result<Self> {
        let mut by_identity: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        let mut labeled = Vec::new();
        for (i, r) in train.iter().enumerate() {
            if r.is_labeled() {
                labeled.push(i);
                by_identity.entry(r.person_id).or_default().push(i);
            }
        }
        if by_identity.len() < 2 {
            return Err(Error::IdentityStructure(format!(
                "need at least 2 labeled identities, found {}",
                by_identity.len()
            )));
        }
        let anchors: Vec<usize> = labeled
            .iter()
            .copied()
            .filter(|&i| by_identity[&train.record(i).person_id].len() >= 2)
            .collect();
        if anchors.is_empty() {
            return Err(Error::IdentityStructure(
                "no identity has 2 or more images, so no positive pair exists".into(),
            ));
        }
        Ok(Self {
            labeled,
            by_identity,
            anchors,
        })
    }

    pub fn num_identities(&self) -> usize {
        self.by_identity.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, train: &FeatureSet, rng: &mut R) -> Triplet {
        let anchor = self.anchors[rng.random_range(0..self.anchors.len())];
        let pid = train.record(anchor).person_id;
        let members = &self.by_identity[&pid];

        let at = members.iter().position(|&i| i == anchor).expect("anchor in its identity");
        let mut r = rng.random_range(0..members.len() - 1);
        if r >= at {
            r += 1;
        }
        let positive = members[r];

        let others = self.labeled.len() - members.len();
        let r = rng.random_range(0..others);
        let negative = self
            .labeled
            .iter()
            .copied()
            .filter(|&i| train.record(i).person_id != pid)
            .nth(r)
            .expect("negative pool counted above");

        Triplet {
            anchor,
            positive,
            negative,
        }
    }
}

/// Draws one triplet. Building a [`TripletSampler`] once is cheaper for
/// repeated draws.
pub fn sample_triplet<R: Rng + ?Sized>(train: &FeatureSet, rng: &mut R) -> Result<Triplet> {
    Ok(TripletSampler::new(train)?.sample(train, rng))
}
