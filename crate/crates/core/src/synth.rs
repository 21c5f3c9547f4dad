//! Deterministic synthetic embeddings with camera-dependent bias.
//!
//! Every image is `center(id) + bias · offset(cam) + noise · z`, where the
//! camera offsets are orthonormal random directions and `z` is standard
//! normal noise. Draws happen in a fixed order (camera directions, identity
//! centers, then per-image noise) and are scaled afterwards, so changing a
//! scale with the seed held fixed changes only magnitudes, never the draws.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{seeded_rng, ReproRng};
use crate::store::{FeatureRecord, FeatureSet, Role};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub num_identities: usize,
    pub cams: usize,
    pub images_per_id_per_cam: usize,
    pub dim: usize,
    /// Per-coordinate standard deviation of identity centers.
    pub identity_spread: f64,
    /// Norm of each camera's offset vector.
    pub camera_bias_scale: f64,
    /// Per-coordinate standard deviation of image noise.
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_identities: 50,
            cams: 4,
            images_per_id_per_cam: 3,
            dim: 64,
            identity_spread: 0.25,
            camera_bias_scale: 1.5,
            noise_scale: 0.3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.num_identities < 2 {
            return bad("num_identities must be at least 2 (train and test are disjoint)");
        }
        if self.cams < 2 {
            return bad("cams must be at least 2 so every query has a cross-camera match");
        }
        if self.images_per_id_per_cam < 2 {
            return bad("images_per_id_per_cam must be at least 2 (one query, one gallery image per camera)");
        }
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.cams > self.dim {
            return bad("cams cannot exceed dim (camera offsets are orthogonal)");
        }
        let scales = [self.identity_spread, self.camera_bias_scale, self.noise_scale];
        if scales.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return bad("scales must be finite and non-negative");
        }
        if scales.iter().all(|&s| s == 0.0) {
            return bad("at least one scale must be positive");
        }
        Ok(())
    }

    /// Identities `0..num_train_identities()` go to train, the rest to test.
    pub fn num_train_identities(&self) -> usize {
        self.num_identities / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub train: FeatureSet,
    pub queries: FeatureSet,
    pub gallery: FeatureSet,
}

fn normal_vec(rng: &mut ReproRng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// Gram-Schmidt over fresh normal draws.
fn camera_directions(rng: &mut ReproRng, cams: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cams);
    for _ in 0..cams {
        let mut v = normal_vec(rng, dim);
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
}

pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let c = config;
    let mut rng = seeded_rng(c.seed);
    let offsets = camera_directions(&mut rng, c.cams, c.dim);
    let centers: Vec<Vec<f64>> = (0..c.num_identities).map(|_| normal_vec(&mut rng, c.dim)).collect();

    let n_train = c.num_train_identities();
    let (mut train, mut queries, mut gallery) = (Vec::new(), Vec::new(), Vec::new());
    for (pid, center) in centers.iter().enumerate() {
        for (cam, offset) in offsets.iter().enumerate() {
            for img in 0..c.images_per_id_per_cam {
                let z = normal_vec(&mut rng, c.dim);
                let feature: Vec<f32> = (0..c.dim)
                    .map(|d| {
                        (c.identity_spread * center[d] + c.camera_bias_scale * offset[d] + c.noise_scale * z[d]) as f32
                    })
                    .collect();
                let (bucket, role) = if pid < n_train {
                    (&mut train, Role::Train)
                } else if img == 0 {
                    (&mut queries, Role::Query)
                } else {
                    (&mut gallery, Role::Gallery)
                };
                bucket.push(FeatureRecord::new(
                    format!("{role}_{pid:05}_c{cam}_{img}"),
                    pid as i64,
                    cam as u32,
                    feature,
                ));
            }
        }
    }
    Ok(SynthData {
        train: FeatureSet::new(train, c.dim, Role::Train)?,
        queries: FeatureSet::new(queries, c.dim, Role::Query)?,
        gallery: FeatureSet::new(gallery, c.dim, Role::Gallery)?,
    })
}
