use std::io::Write;
use std::path::Path;

use super::config::RunConfig;
use super::{meta_path, CliError, ErrorKind, EvalArgs, FitArgs, FuseArgs, RankArgs, ScoringArgs, SynthArgs};
use crate::amc::{fit_weights_repeated, write_triplet_csv};
use crate::error::Error;
use crate::fusion::{uffm_fuse_all, RefinedFeature, RefinedKind};
use crate::pipeline::{evaluate, rank_all, write_rank_list, RankingResult};
use crate::simkit;
use crate::store::{
    load_feature_set, load_weights_file, read_matrix, save_weights_with_config, write_feature_set, write_matrix,
    CombinationWeights, FeatureSet, Matrix, Role,
};
use crate::synth::{generate, SynthConfig};

type CliResult<T = ()> = Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| Error::io(path, e).into()
}

fn load(matrix: &Path, meta: Option<&std::path::PathBuf>, role: Role) -> CliResult<FeatureSet> {
    Ok(load_feature_set(matrix, meta_path(matrix, meta), role)?)
}

pub(super) fn synth(a: &SynthArgs) -> CliResult {
    let cfg = SynthConfig {
        num_identities: a.ids,
        cams: a.cams,
        images_per_id_per_cam: a.imgs,
        dim: a.dim,
        identity_spread: a.spread,
        camera_bias_scale: a.bias,
        noise_scale: a.noise,
        seed: a.seed,
    };
    let data = generate(&cfg)?;
    std::fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    for (name, set) in [("train", &data.train), ("query", &data.queries), ("gallery", &data.gallery)] {
        write_feature_set(set, a.out.join(format!("{name}.urfb")), a.out.join(format!("{name}.csv")))?;
    }
    let mut rc = RunConfig::new("synth");
    rc.set_path("out", &a.out)
        .set("ids", a.ids)
        .set("cams", a.cams)
        .set("imgs", a.imgs)
        .set("dim", a.dim)
        .set("spread", a.spread)
        .set("bias", a.bias)
        .set("noise", a.noise)
        .set("seed", a.seed);
    let path = a.out.join("synth.run");
    std::fs::write(&path, rc.to_text()).map_err(io_err(&path))?;
    Ok(())
}

fn contributors_path(out: &Path) -> std::path::PathBuf {
    out.with_extension("contributors.csv")
}

pub(super) fn fuse(a: &FuseArgs) -> CliResult {
    let gallery = load(&a.gallery, a.gallery_meta.as_ref(), Role::Gallery)?;
    let urfs = uffm_fuse_all(&gallery, a.k)?;
    let mut data = Vec::with_capacity(gallery.len() * gallery.dim());
    for u in &urfs {
        data.extend_from_slice(&u.vector);
    }
    write_matrix(
        &a.out,
        &Matrix {
            rows: urfs.len(),
            dim: gallery.dim(),
            data,
        },
    )?;

    let cpath = contributors_path(&a.out);
    let mut w = std::io::BufWriter::new(std::fs::File::create(&cpath).map_err(io_err(&cpath))?);
    let write = |w: &mut std::io::BufWriter<std::fs::File>| -> std::io::Result<()> {
        writeln!(w, "target_item_id,neighbor_item_id,weight")?;
        for u in &urfs {
            let target = &gallery.record(u.source_index).item_id;
            for c in &u.contributors {
                writeln!(w, "{target},{},{}", gallery.record(c.index).item_id, c.weight)?;
            }
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(&cpath))?;

    let mut rc = RunConfig::new("fuse");
    rc.set_path("gallery", &a.gallery)
        .set_path("gallery_meta", &meta_path(&a.gallery, a.gallery_meta.as_ref()))
        .set("k", a.k)
        .set_path("out", &a.out)
        .set("fallback_count", urfs.iter().filter(|u| u.is_fallback()).count());
    rc.write_sidecar(&a.out)?;
    rc.write_sidecar(&cpath)?;
    Ok(())
}

pub(super) fn fit(a: &FitArgs) -> CliResult {
    let train = load(&a.train, a.train_meta.as_ref(), Role::Train)?;
    let fit = fit_weights_repeated(&train, a.n, a.k, a.seed, a.repeats)?;
    let chosen = if a.single_run { fit.runs[0] } else { fit.mean };

    let mut rc = RunConfig::new("fit");
    rc.set_path("train", &a.train)
        .set_path("train_meta", &meta_path(&a.train, a.train_meta.as_ref()))
        .set("k", a.k)
        .set("n", a.n)
        .set("repeats", a.repeats)
        .set("seed", a.seed)
        .set("single_run", a.single_run)
        .set_path("out", &a.out)
        .set_opt_path("dump_triplets", a.dump_triplets.as_deref());
    save_weights_with_config(&chosen, &rc.entries, &a.out)?;
    if let Some(dump) = &a.dump_triplets {
        write_triplet_csv(&fit.datasets, dump)?;
        rc.write_sidecar(dump)?;
    }

    let mut out = String::new();
    for w in &fit.runs {
        out += &format!(
            "run.{}=alpha:{} beta:{} gamma:{} intercept:{} seed:{} rank_deficient:{}\n",
            w.run_index, w.alpha, w.beta, w.gamma, w.intercept, w.seed, w.rank_deficient
        );
    }
    out += &format!(
        "mean=alpha:{} beta:{} gamma:{} intercept:{}\n",
        fit.mean.alpha, fit.mean.beta, fit.mean.gamma, fit.mean.intercept
    );
    out += &format!(
        "stddev=alpha:{} beta:{} gamma:{} intercept:{}\n",
        fit.stddev.alpha, fit.stddev.beta, fit.stddev.gamma, fit.stddev.intercept
    );
    out += &format!("selected={}\n", if a.single_run { "run.0" } else { "mean" });
    print!("{out}");
    Ok(())
}

struct Scored {
    queries: FeatureSet,
    gallery: FeatureSet,
    rankings: Vec<RankingResult>,
    config: RunConfig,
}

fn load_urfs(path: &Path, gallery: &FeatureSet) -> CliResult<Vec<RefinedFeature>> {
    let m = read_matrix(path)?;
    if m.rows != gallery.len() {
        return Err(Error::Misaligned {
            expected: gallery.len(),
            found: m.rows,
        }
        .into());
    }
    if m.dim != gallery.dim() {
        return Err(Error::IncompatibleDims {
            left: m.dim,
            right: gallery.dim(),
        }
        .into());
    }
    (0..m.rows)
        .map(|j| {
            let v = m.row(j);
            if let Some(column) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row: j, column }.into());
            }
            if simkit::sq_norm(v) == 0.0 {
                return Err(Error::ZeroNorm { row: j }.into());
            }
            Ok(RefinedFeature {
                source_index: j,
                vector: v.to_vec(),
                kind: RefinedKind::Urf,
                contributors: Vec::new(),
            })
        })
        .collect()
}

fn score(a: &ScoringArgs, command: &str) -> CliResult<Scored> {
    if a.urf.is_none() && !a.baseline {
        return Err(CliError::usage(
            "fused gallery features are required: pass --urf <file> (from `fuse`) or use --baseline",
        ));
    }
    let queries = load(&a.query, a.query_meta.as_ref(), Role::Query)?;
    let gallery = load(&a.gallery, a.gallery_meta.as_ref(), Role::Gallery)?;

    let (weights, mode) = match (&a.weights, a.baseline, a.refined_only) {
        (Some(p), _, _) => (load_weights_file(p)?.weights, "weights"),
        (None, true, _) => (CombinationWeights::baseline(), "baseline"),
        (None, false, true) => (CombinationWeights::refined_only(), "refined_only"),
        _ => return Err(CliError::usage("one of --weights, --baseline, --refined-only is required")),
    };
    let urfs = match &a.urf {
        Some(p) => load_urfs(p, &gallery)?,
        None => (0..gallery.len())
            .map(|j| RefinedFeature::identity(&gallery, j, RefinedKind::Urf))
            .collect(),
    };
    let rankings = rank_all(&queries, &gallery, &urfs, &weights)?;

    let mut rc = RunConfig::new(command);
    rc.set_path("query", &a.query)
        .set_path("query_meta", &meta_path(&a.query, a.query_meta.as_ref()))
        .set_path("gallery", &a.gallery)
        .set_path("gallery_meta", &meta_path(&a.gallery, a.gallery_meta.as_ref()))
        .set_opt_path("urf", a.urf.as_deref())
        .set_opt_path("weights_file", a.weights.as_deref())
        .set("mode", mode)
        .set("alpha", weights.alpha)
        .set("beta", weights.beta)
        .set("gamma", weights.gamma)
        .set("k_used", weights.k_used)
        .set("n_used", weights.n_used)
        .set("seed", weights.seed)
        .set("run_index", weights.run_index);
    Ok(Scored {
        queries,
        gallery,
        rankings,
        config: rc,
    })
}

pub(super) fn eval(a: &EvalArgs) -> CliResult {
    if a.max_rank == 0 {
        return Err(CliError::usage("--max-rank must be at least 1"));
    }
    let mut s = score(&a.scoring, "eval")?;
    s.config
        .set("max_rank", a.max_rank)
        .set_opt_path("rank_list", a.rank_list.as_deref());
    let mut report = evaluate(&s.rankings, &s.queries, &s.gallery, a.max_rank);
    check_report(&report)?;
    report.config_echo = s.config.entries.clone();
    let text = report.to_text(&s.queries);
    match &a.out {
        Some(p) => std::fs::write(p, &text).map_err(io_err(p))?,
        None => print!("{text}"),
    }
    if let Some(p) = &a.rank_list {
        write_rank_list(&s.rankings, &s.queries, &s.gallery, a.top, p)?;
        s.config.write_sidecar(p)?;
    }
    Ok(())
}

pub(super) fn rank(a: &RankArgs) -> CliResult {
    let mut s = score(&a.scoring, "rank")?;
    s.config.set_path("out", &a.out);
    write_rank_list(&s.rankings, &s.queries, &s.gallery, a.top, &a.out)?;
    s.config.write_sidecar(&a.out)?;
    Ok(())
}

fn check_report(r: &crate::pipeline::EvalReport) -> CliResult {
    let monotone = r.cmc.windows(2).all(|w| w[0] <= w[1]);
    let bounded = r.cmc.iter().chain(std::iter::once(&r.map)).all(|v| (0.0..=1.0).contains(v));
    if monotone && bounded {
        Ok(())
    } else {
        Err(CliError {
            kind: ErrorKind::Internal,
            message: "evaluation report violates CMC/mAP bounds".into(),
        })
    }
}
