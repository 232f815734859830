//! One runner per subcommand. Each reads its own `params` block, computes,
//! and writes CSV/JSON/PGM artifacts.

use std::path::Path;
use std::sync::Arc;

use limitlab::crossed_product::{equivariance_defect, kms_defect, tau, CrossedProductElement};
use limitlab::groups::{
    boundary_conjugacy, box_dimension, enumerate_ball, estimate_delta, estimate_delta_with, limit_set_sample,
    DeltaOptions,
};
use limitlab::kcycles::{
    cantor_cycle, circle_module, hardy_projections, mode_norm_sq, moebius_pullback, pullback_commutator_defect, pullback_round_trip_defect,
    pushforward_symbols, shift_operator, sphere_signature_operator, summability_threshold, t_pairing,
    ComponentSelector, SummabilityOptions,
};
use limitlab::linalg::singular_values;
use limitlab::patterson_sullivan::{lipschitz_bump, poincare_shells, ps_measure, translate_basepoint, transport_defect, TestFunction};
use limitlab::{BoundaryPoint, GroupPresentation, InteriorPoint, Isometry, Word};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{load, ExperimentConfig, SymbolSpec};
use crate::output::{Artifacts, Cell, Metadata};
use crate::CliError;

fn num<T>(r: limitlab::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::from)
}

fn start<P: DeserializeOwned + Default>(sub: &str, config: &Path, out: &Path) -> Result<(ExperimentConfig<P>, Artifacts), CliError> {
    let loaded = load::<P>(config)?;
    let meta = Metadata {
        subcommand: sub.to_string(),
        experiment: loaded.config.experiment.clone(),
        config_hash: loaded.hash,
        config: loaded.canonical,
    };
    let art = Artifacts::new(out, meta)?;
    Ok((loaded.config, art))
}

fn point(coords: &Option<Vec<f64>>, dim: usize, default: &[f64]) -> Result<InteriorPoint, CliError> {
    let v = coords.clone().unwrap_or_else(|| {
        let mut d = default.to_vec();
        d.resize(dim + 1, 0.0);
        d
    });
    if v.len() != dim + 1 {
        return Err(CliError::Usage(format!("point {v:?} needs {} ball coordinates", dim + 1)));
    }
    num(InteriorPoint::from_ball(&v))
}

fn words(list: &[String]) -> Result<Vec<Word>, CliError> {
    list.iter().map(|w| num(Word::parse(w))).collect()
}

fn coords_cells(p: &BoundaryPoint, dim: usize) -> Vec<Cell> {
    (0..=dim).map(|i| Cell::F(p.coords()[i])).collect()
}

fn coord_names(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim + 1).map(|i| format!("{prefix}{i}")).collect()
}

/// Critical exponent from the config override or from orbit counting.
fn delta_hat(g: &GroupPresentation, given: Option<f64>, depth: usize) -> Result<(f64, bool), CliError> {
    match given {
        Some(d) => Ok((d, false)),
        None => Ok((num(estimate_delta(g, depth, &InteriorPoint::origin(g.dim())))?.value, true)),
    }
}

// ---------------------------------------------------------------- group

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupParams {
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub basepoint: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct GroupReport {
    kind: String,
    rank: usize,
    dimension: usize,
    heuristic: bool,
    generators: Vec<Vec<Vec<f64>>>,
    depth: usize,
    ball_size: usize,
    counts_by_length: Vec<usize>,
    shortest_displacement: f64,
}

pub fn group(config: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let (cfg, mut art) = start::<GroupParams>("group", config, out)?;
    let g = num(cfg.group()?.build())?;
    let depth = cfg.params.depth.unwrap_or(4);
    let x0 = point(&cfg.params.basepoint, g.dim(), &[])?;
    let ball = num(enumerate_ball(&g, depth, &x0))?;
    let rows = ball
        .words()
        .iter()
        .zip(ball.displacements())
        .map(|(w, d)| vec![Cell::from(w.to_string()), w.len().into(), (*d).into()])
        .collect();
    art.csv("words.csv", &["word", "length", "displacement"], rows)?;
    let generators = g
        .generators()
        .iter()
        .map(|m| {
            let m = m.matrix();
            (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
        })
        .collect();
    let report = GroupReport {
        kind: format!("{:?}", g.kind()),
        rank: g.rank(),
        dimension: g.dim(),
        heuristic: g.is_heuristic(),
        generators,
        depth,
        ball_size: ball.len(),
        counts_by_length: (0..=depth).map(|l| ball.count_at_length(l)).collect(),
        shortest_displacement: ball.displacements().iter().skip(1).copied().fold(f64::INFINITY, f64::min),
    };
    art.json("group.json", &report)?;
    Ok(art.written)
}

// ---------------------------------------------------------------- limitset

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsetParams {
    pub depth: Option<usize>,
    #[serde(default)]
    pub orbit_basepoint: Option<Vec<f64>>,
    /// Raster side in pixels.
    #[serde(default)]
    pub raster: Option<usize>,
    /// Half-width of the rastered square in the complex plane.
    #[serde(default)]
    pub extent: Option<f64>,
    #[serde(default)]
    pub box_scales: Option<Vec<f64>>,
}

pub fn limitset(config: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let (cfg, mut art) = start::<LimitsetParams>("limitset", config, out)?;
    let g = num(cfg.group()?.build())?;
    let p = &cfg.params;
    let depth = p.depth.ok_or_else(|| CliError::Usage("params.depth is required".into()))?;
    let x0 = point(&p.orbit_basepoint, g.dim(), &[])?;
    let cloud = num(limit_set_sample(&g, depth, &x0))?;
    let dim = g.dim();
    let mut cols = vec!["word".to_string()];
    cols.extend(coord_names("x", dim));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let rows = cloud
        .points
        .iter()
        .zip(&cloud.words)
        .map(|(pt, w)| {
            let mut r = vec![Cell::from(w.to_string())];
            r.extend(coords_cells(pt, dim));
            r
        })
        .collect();
    art.csv("limitset.csv", &col_refs, rows)?;

    let side = p.raster.unwrap_or(512);
    if !(16..=8192).contains(&side) {
        return Err(CliError::Usage(format!("params.raster must lie in [16, 8192], got {side}")));
    }
    let zs: Vec<C64> = cloud.points.iter().map(|q| q.to_complex()).filter(|z| z.is_finite()).collect();
    let extent = match p.extent {
        Some(e) if e > 0.0 => e,
        Some(e) => return Err(CliError::Usage(format!("params.extent must be positive, got {e}"))),
        None => 1.05 * zs.iter().map(|z| z.re.abs().max(z.im.abs())).fold(1e-9, f64::max),
    };
    let mut counts = vec![0u32; side * side];
    for z in &zs {
        let px = ((z.re + extent) / (2.0 * extent) * side as f64).floor();
        let py = ((extent - z.im) / (2.0 * extent) * side as f64).floor();
        if px >= 0.0 && py >= 0.0 && (px as usize) < side && (py as usize) < side {
            counts[py as usize * side + px as usize] += 1;
        }
    }
    let cmax = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let pixels: Vec<u8> = counts
        .iter()
        .map(|&c| if c == 0 { 255 } else { (200.0 * (1.0 - (1.0 + c as f64).ln() / (1.0 + cmax).ln())).round() as u8 })
        .collect();
    art.pgm("limitset.pgm", side, side, &pixels)?;

    let box_dim = match &p.box_scales {
        Some(s) => Some(num(box_dimension(&cloud, s))?),
        None => None,
    };
    art.json(
        "limitset.json",
        &json!({
            "depth": depth,
            "points": cloud.len(),
            "dimension": dim,
            "largest_angular_gap": cloud.largest_angular_gap(),
            "raster": side,
            "extent": extent,
            "box_dimension": box_dim,
            "box_scales": p.box_scales,
        }),
    )?;
    Ok(art.written)
}

// ---------------------------------------------------------------- delta

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaParams {
    pub depth: Option<usize>,
    #[serde(default)]
    pub orbit_basepoint: Option<Vec<f64>>,
    #[serde(default)]
    pub window_start: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
    /// Word length for the box-counting cloud; skipped when absent.
    #[serde(default)]
    pub box_depth: Option<usize>,
    #[serde(default)]
    pub box_scales: Option<Vec<f64>>,
}

pub fn delta(config: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let (cfg, mut art) = start::<DeltaParams>("delta", config, out)?;
    let g = num(cfg.group()?.build())?;
    let p = &cfg.params;
    let depth = p.depth.ok_or_else(|| CliError::Usage("params.depth is required".into()))?;
    let x0 = point(&p.orbit_basepoint, g.dim(), &[])?;
    let mut opts = DeltaOptions::default();
    if let Some(w) = p.window_start {
        if !(0.0..1.0).contains(&w) {
            return Err(CliError::Usage(format!("params.window_start must lie in [0, 1), got {w}")));
        }
        opts.window_start = w;
    }
    if let Some(s) = p.samples {
        opts.samples = s;
    }
    let est = num(estimate_delta_with(&g, depth, &x0, &opts))?;
    let (slope, icpt) = limitlab::linalg::least_squares(
        &est.radii,
        &est.counts.iter().map(|&c| (c as f64).ln()).collect::<Vec<_>>(),
    );
    let rows = est
        .radii
        .iter()
        .zip(&est.counts)
        .map(|(r, c)| vec![Cell::F(*r), Cell::from(*c), Cell::F((*c as f64).ln()), Cell::F(slope * r + icpt)])
        .collect();
    art.csv("delta_fit.csv", &["radius", "count", "log_count", "fitted_log_count"], rows)?;
    let box_dim = match p.box_depth {
        Some(bd) => {
            let scales = p
                .box_scales
                .clone()
                .unwrap_or_else(|| (0..9).map(|i| 0.2 * 10f64.powf(-(i as f64) * 0.25)).collect());
            let cloud = num(limit_set_sample(&g, bd, &x0))?;
            Some(json!({"depth": bd, "points": cloud.len(), "scales": scales, "value": num(box_dimension(&cloud, &scales))?}))
        }
        None => None,
    };
    art.json("delta.json", &json!({"estimate": est, "intercept": icpt, "box_dimension": box_dim}))?;
    Ok(art.written)
}

// ---------------------------------------------------------------- psmeasure

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsParams {
    pub depth: Option<usize>,
    /// `s = delta_hat + epsilon`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta_hat: Option<f64>,
    #[serde(default)]
    pub delta_depth: Option<usize>,
    #[serde(default)]
    pub basepoint: Option<Vec<f64>>,
    #[serde(default)]
    pub orbit_basepoint: Option<Vec<f64>>,
    #[serde(default)]
    pub bump_radius: Option<f64>,
    /// Second basepoint for the basepoint-change round trip.
    #[serde(default)]
    pub translate_to: Option<Vec<f64>>,
}

/// Bump centers: Schottky circle centers on the sphere, else the attracting
/// fixed points of the generators and their inverses.
pub fn bump_centers(g: &GroupPresentation) -> Result<Vec<BoundaryPoint>, CliError> {
    if let Some(circles) = g.schottky_circles() {
        return Ok(circles
            .iter()
            .flat_map(|(a, b)| [a, b])
            .map(|c| {
                let z = c.center_c();
                if g.dim() == 1 {
                    BoundaryPoint::from_angle(z.arg())
                } else {
                    BoundaryPoint::from_complex(z)
                }
            })
            .collect());
    }
    let mut v = Vec::new();
    for l in 0..2 * g.rank() as u8 {
        if let Ok(p) = g.letter(l).attracting_fixed_point() {
            v.push(p);
        }
    }
    Ok(v)
}

pub fn psmeasure(config: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let (cfg, mut art) = start::<PsParams>("psmeasure", config, out)?;
    let g = num(cfg.group()?.build())?;
    let p = &cfg.params;
    let depth = p.depth.ok_or_else(|| CliError::Usage("params.depth is required".into()))?;
    let (dh, estimated) = delta_hat(&g, p.delta_hat, p.delta_depth.unwrap_or(12))?;
    let eps = p.epsilon.unwrap_or(0.05);
    let x = point(&p.basepoint, g.dim(), &[])?;
    let x0 = point(&p.orbit_basepoint, g.dim(), &[0.1, 0.05])?;
    let mu = num(ps_measure(&g, &x, &x0, dh + eps, depth, dh))?;
    let dim = g.dim();
    let mut cols = vec!["word".to_string(), "mass".to_string()];
    cols.extend(coord_names("x", dim));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let rows = mu
        .atoms
        .iter()
        .zip(&mu.weights)
        .zip(&mu.words)
        .map(|((a, w), word)| {
            let mut r = vec![Cell::from(word.to_string()), Cell::F(*w)];
            r.extend(coords_cells(a, dim));
            r
        })
        .collect();
    art.csv("psmeasure.csv", &col_refs, rows)?;

    let radius = p.bump_radius.unwrap_or(0.2);
    let bumps: Vec<_> = bump_centers(&g)?.into_iter().map(|c| lipschitz_bump(c, radius)).collect();
    let tests: Vec<TestFunction> = bumps.iter().map(|b| b as TestFunction).collect();
    let mut transport = Vec::new();
    for l in 0..2 * g.rank() as u8 {
        let w = Word::from_letters(&[l]);
        transport.push(json!({"word": w.to_string(), "defect": num(transport_defect(&mu, g.letter(l), &tests))?}));
    }
    let shells = if depth >= 4 { Some(num(poincare_shells(&g, &x0, dh, depth))?) } else { None };
    if shells.as_ref().is_some_and(|s| s.suspected_convergence_type) {
        log::warn!("Poincare shells decay at delta_hat; the group may be of convergence type and the truncated measure unreliable");
    }
    let round_trip = match &p.translate_to {
        Some(y) => {
            let y = point(&Some(y.clone()), dim, &[])?;
            let there = num(translate_basepoint(&mu, &y))?;
            let back = num(translate_basepoint(&there, &x))?;
            let gap = back.weights.iter().zip(&mu.weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Some(json!({"translate_to": p.translate_to, "mass_there": there.total_mass(), "max_weight_gap": gap}))
        }
        None => None,
    };
    art.json(
        "psmeasure.json",
        &json!({
            "depth": depth,
            "atoms": mu.len(),
            "s": mu.s,
            "epsilon": eps,
            "delta_hat": dh,
            "delta_hat_estimated": estimated,
            "total_mass": mu.total_mass(),
            "heaviest_atom": mu.words[mu.heaviest()].to_string(),
            "bump_radius": radius,
            "transport_defect": transport,
            "basepoint_round_trip": round_trip,
            "poincare_shells": shells,
        }),
    )?;
    Ok(art.written)
}

// ---------------------------------------------------------------- kms

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KmsParams {
    #[serde(default)]
    pub depths: Option<Vec<usize>>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta_hat: Option<f64>,
    #[serde(default)]
    pub delta_depth: Option<usize>,
    #[serde(default)]
    pub basepoint: Option<Vec<f64>>,
    #[serde(default)]
    pub orbit_basepoint: Option<Vec<f64>>,
    #[serde(default)]
    pub t_values: Option<Vec<f64>>,
    /// `f = 1 . w`, `f' = 1 . w^{-1}` for each word.
    #[serde(default)]
    pub words: Option<Vec<String>>,
    /// Exponent offset for the wrong-exponent control.
    #[serde(default)]
    pub wrong_exponent_offset: Option<f64>,
    #[serde(default)]
    pub equivariance_words: Option<Vec<String>>,
    /// Extra pairs with random words and coefficients; needs `seed`.
    #[serde(default)]
    pub random_elements: Option<usize>,
}

pub fn kms(config: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let (cfg, mut art) = start::<KmsParams>("kms", config, out)?;
    let g = Arc::new(num(cfg.group()?.build())?);
    let p = &cfg.params;
    let depths = p.depths.clone().unwrap_or_else(|| vec![8, 12]);
    let (dh, estimated) = delta_hat(&g, p.delta_hat, p.delta_depth.unwrap_or(12))?;
    let eps = p.epsilon.unwrap_or(0.02);
    let wrong = p.wrong_exponent_offset.unwrap_or(0.5);
    let ts = p.t_values.clone().unwrap_or_else(|| vec![0.0, 1.0]);
    let x = point(&p.basepoint, g.dim(), &[])?;
    let x0 = point(&p.orbit_basepoint, g.dim(), &[0.1, 0.05])?;
    let one = C64::new(1.0, 0.0);

    let mut pairs: Vec<(String, CrossedProductElement, CrossedProductElement)> = Vec::new();
    let word_list = words(&p.words.clone().unwrap_or_else(|| ["a", "b", "A", "B"].map(String::from).to_vec()))?;
    for w in word_list {
        let f = num(CrossedProductElement::constant(g.clone(), w.clone(), one))?;
        let fp = num(CrossedProductElement::constant(g.clone(), w.inverse(), one))?;
        pairs.push((w.to_string(), f, fp));
    }
    let n_random = p.random_elements.unwrap_or(0);
    if n_random > 0 {
        let seed = cfg.require_seed("params.random_elements samples random elements")?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let letters = 2 * g.rank() as u8;
        for i in 0..n_random {
            let len = rng.gen_range(1..=2);
            let ls: Vec<u8> = (0..len).map(|_| rng.gen_range(0..letters)).collect();
            let w = Word::from_letters(&ls);
            if w.is_identity() {
                continue;
            }
            let c1 = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let c2 = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let f = num(CrossedProductElement::constant(g.clone(), w.clone(), c1))?;
            let fp = num(CrossedProductElement::constant(g.clone(), w.inverse(), c2))?;
            pairs.push((format!("random{i}:{w}"), f, fp));
        }
    }

    let mut rows = Vec::new();
    let mut report_rows = Vec::new();
    let mut equiv = Vec::new();
    let unit = CrossedProductElement::unit(g.clone());
    let eq_words = words(&p.equivariance_words.clone().unwrap_or_else(|| vec!["a".into(), "b".into()]))?;
    for &l in &depths {
        let mu = num(ps_measure(&g, &x, &x0, dh + eps, l, dh))?;
        let tu = num(tau(&unit, &mu))?.norm();
        for (name, f, fp) in &pairs {
            let wrong_def = num(kms_defect(f, fp, 0.0, dh + wrong, &mu))?;
            for &t in &ts {
                let d = num(kms_defect(f, fp, t, dh, &mu))?;
                rows.push(vec![
                    Cell::from(l),
                    Cell::from(name.clone()),
                    Cell::F(t),
                    Cell::F(mu.s),
                    Cell::F(d),
                    Cell::F(tu),
                    Cell::F(d / tu),
                    Cell::F(wrong_def / tu),
                ]);
                report_rows.push(json!({
                    "depth": l, "pair": name, "t": t, "s": mu.s, "defect": d, "tau_unit": tu,
                    "relative_defect": d / tu, "wrong_exponent_relative_defect": wrong_def / tu,
                }));
            }
        }
        let family = |y: &InteriorPoint| ps_measure(&g, y, &x0, dh + eps, l, dh);
        for w in &eq_words {
            let gamma = num(g.element(w))?;
            let d = num(equivariance_defect(&unit, &gamma, &x, &family))?;
            equiv.push(json!({"depth": l, "word": w.to_string(), "defect": d, "tau_unit": tu, "relative_defect": d / tu}));
        }
    }
    art.csv(
        "kms.csv",
        &["depth", "pair", "t", "s", "defect", "tau_unit", "relative_defect", "wrong_exponent_relative_defect"],
        rows,
    )?;
    art.json(
        "kms.json",
        &json!({
            "delta_hat": dh,
            "delta_hat_estimated": estimated,
            "epsilon": eps,
            "depths": depths,
            "t_values": ts,
            "wrong_exponent": dh + wrong,
            "seed": cfg.seed,
            "kms": report_rows,
            "equivariance": equiv,
        }),
    )?;
    Ok(art.written)
}

// ---------------------------------------------------------------- kcycle

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorParams {
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub component: Option<usize>,
    #[serde(default)]
    pub symbol: Option<SymbolSpec>,
    /// Scan exponents `p = delta_hat + offset`.
    #[serde(default)]
    pub p_offsets: Option<Vec<f64>>,
    #[serde(default)]
    pub delta_hat: Option<f64>,
    #[serde(default)]
    pub delta_depth: Option<usize>,
}

const DENSE_CHECK_DEPTH: usize = 4;

/// Geometric ratio of the last scan increments.
pub fn increment_ratio(partial: &[f64]) -> f64 {
    let incs: Vec<f64> = partial.windows(2).map(|w| w[1] - w[0]).collect();
    let k = incs.len();
    if k < 2 || incs[k - 2] <= 0.0 {
        return 0.0;
    }
    incs[k - 1] / incs[k - 2]
}

pub fn kcycle_cantor(config: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let (cfg, mut art) = start::<CantorParams>("kcycle-cantor", config, out)?;
    let g = num(cfg.group()?.build())?;
    let p = &cfg.params;
    let depth = p.depth.unwrap_or(8);
    let selector = p.component.map(ComponentSelector::Component).unwrap_or(ComponentSelector::All);
    let cc = num(cantor_cycle(&g, selector, depth))?;
    let a = p.symbol.clone().unwrap_or(SymbolSpec::FirstCoordinate).build(1)?;
    let (dh, estimated) = delta_hat(&g, p.delta_hat, p.delta_depth.unwrap_or(12))?;
    let rows = cc
        .gaps
        .iter()
        .enumerate()
        .map(|(i, gap)| {
            vec![
                Cell::from(i),
                Cell::from(gap.word.to_string()),
                Cell::from(gap.fundamental),
                Cell::from(gap.component),
                Cell::from(gap.generation),
                Cell::F(gap.b.angle()),
                Cell::F(gap.c.angle()),
                Cell::F((a.eval(&gap.b) - a.eval(&gap.c)).norm()),
            ]
        })
        .collect();
    art.csv(
        "cantor_gaps.csv",
        &["index", "word", "fundamental", "component", "generation", "b_angle", "c_angle", "commutator_singular_value"],
        rows,
    )?;
    let mut scan_rows = Vec::new();
    let mut scans = Vec::new();
    for off in p.p_offsets.clone().unwrap_or_else(|| vec![-0.3, 0.0, 0.3]) {
        let pp = dh + off;
        if !(pp > 0.0) {
            return Err(CliError::Usage(format!("scan exponent delta_hat + {off} = {pp} is not positive")));
        }
        let s = cc.generation_scan(&a, pp);
        for (k, v) in s.iter().enumerate() {
            let inc = if k == 0 { *v } else { v - s[k - 1] };
            scan_rows.push(vec![Cell::F(pp), Cell::from(k), Cell::F(*v), Cell::F(inc)]);
        }
        let r = increment_ratio(&s);
        scans.push(json!({
            "p": pp, "offset": off, "final_partial_sum": s.last(), "increment_ratio": r,
            "trend": if r < 0.9 { "bounded" } else if r > 1.0 { "growing" } else { "marginal" },
        }));
    }
    art.csv("cantor_scan.csv", &["p", "generation", "partial_sum", "increment"], scan_rows)?;
    // Dense algebra checks run on a shallower copy; the swap structure does not
    // depend on the depth.
    let dense_depth = depth.min(DENSE_CHECK_DEPTH);
    let small = num(cantor_cycle(&g, selector, dense_depth))?;
    let c = num(small.cycle())?;
    let dense = json!({
        "depth": dense_depth,
        "hilbert_dim": c.dim(),
        "anticommutator_defect": c.anticommutator_defect(),
        "involution_defect": c.involution_defect(),
        "self_adjoint_defect": c.self_adjoint_defect(),
    });
    art.json(
        "cantor.json",
        &json!({
            "depth": depth,
            "gaps": cc.gaps.len(),
            "hilbert_dim": cc.dim(),
            "components": cc.components,
            "delta_hat": dh,
            "delta_hat_estimated": estimated,
            "max_gap_by_generation": (0..=depth).map(|k| cc.max_gap(k)).collect::<Vec<_>>(),
            "scans": scans,
            "dense_checks": dense,
        }),
    )?;
    Ok(art.written)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleParams {
    #[serde(default)]
    pub cutoff: Option<usize>,
    /// Quadrature points for the norm and pairing checks.
    #[serde(default)]
    pub quadrature: Option<usize>,
}

pub fn kcycle_circle(config: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let (cfg, mut art) = start::<CircleParams>("kcycle-circle", config, out)?;
    let n = cfg.params.cutoff.unwrap_or(16);
    let m = cfg.params.quadrature.unwrap_or(4 * n + 8);
    let cyc = num(circle_module(n))?;
    let mut rows = Vec::new();
    let mut worst_norm = 0.0f64;
    for (i, lab) in cyc.labels.iter().enumerate() {
        let k: i64 = lab.trim_start_matches("k=").parse().expect("mode label");
        let q = num(mode_norm_sq(k, m))?;
        worst_norm = worst_norm.max((q - cyc.weights[i]).abs());
        rows.push(vec![Cell::I(k), Cell::F(cyc.f[(i, i)].re), Cell::F(cyc.weights[i]), Cell::F(q)]);
    }
    art.csv("circle_modes.csv", &["k", "T", "weight", "quadrature_norm_sq"], rows)?;
    let (ep, em) = num(hardy_projections(n))?;
    let id = nalgebra::DMatrix::<C64>::identity(ep.dim(), ep.dim());
    let idem = (&ep.matrix * &ep.matrix - &ep.matrix).camax();
    let orth = (&ep.matrix * &em.matrix).camax();
    let mut zero_mode = id.clone();
    for i in 0..ep.dim() {
        if i != n {
            zero_mode[(i, i)] = C64::new(0.0, 0.0);
        }
    }
    let sum_defect = (&ep.matrix + &em.matrix + zero_mode - &id).camax();
    let shift = num(shift_operator(n))?;
    let comm = &ep.matrix * &shift.matrix - &shift.matrix * &ep.matrix;
    // interior block |k| <= N - 1
    let inner = comm.view((1, 1), (2 * n - 1, 2 * n - 1)).into_owned();
    let sv = singular_values(&inner);
    let rank = sv.iter().filter(|&&s| s > 1e-12 * sv[0].max(1e-300)).count();
    let mut pairing_gap = 0.0f64;
    for (k1, k2) in [(1i64, 1i64), (2, 2), (-3, -3), (1, 2)] {
        let a = num(t_pairing(k1, k2, C64::new(0.0, 0.0), m))?;
        let b = num(t_pairing(k1, k2, C64::new(0.7, -0.3), m))?;
        pairing_gap = pairing_gap.max((a - b).norm());
    }
    art.json(
        "circle.json",
        &json!({
            "cutoff": n,
            "quadrature": m,
            "t_eigenvalues_plus": cyc.labels.iter().enumerate().filter(|(i, _)| cyc.f[(*i, *i)].re == 1.0).count(),
            "t_eigenvalues_minus": cyc.labels.iter().enumerate().filter(|(i, _)| cyc.f[(*i, *i)].re == -1.0).count(),
            "involution_defect": cyc.involution_defect(),
            "self_adjoint_defect": cyc.self_adjoint_defect(),
            "max_norm_defect": worst_norm,
            "hardy_idempotent_defect": idem,
            "hardy_orthogonality_defect": orth,
            "hardy_sum_defect": sum_defect,
            "shift_commutator_rank_interior": rank,
            "shift_commutator_singular_values": sv,
            "pairing_primitive_gap": pairing_gap,
        }),
    )?;
    Ok(art.written)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereParams {
    #[serde(default)]
    pub lmax: Option<Vec<usize>>,
    #[serde(default)]
    pub rapidity: Option<f64>,
    #[serde(default)]
    pub rotation_angle: Option<f64>,
    /// Quadrature degree; `2 l_max + 2` when absent.
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub round_trip: Option<bool>,
}

pub fn kcycle_sphere(config: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let (cfg, mut art) = start::<SphereParams>("kcycle-sphere", config, out)?;
    let p = &cfg.params;
    let ls = p.lmax.clone().unwrap_or_else(|| vec![8, 16, 32]);
    let rap = p.rapidity.unwrap_or(0.3);
    let ang = p.rotation_angle.unwrap_or(0.7);
    let boost = num(Isometry::boost(2, 0, rap))?;
    let rot = num(Isometry::rotation(2, 0, 2, ang))?.product(&num(Isometry::rotation(2, 0, 1, 0.4))?);
    let mut rows = Vec::new();
    let mut report = Vec::new();
    for &l in &ls {
        let s = num(sphere_signature_operator(l))?;
        let pb = num(moebius_pullback(l, &boost, p.degree))?;
        let pr = num(moebius_pullback(l, &rot, p.degree))?;
        let boost_def = num(pullback_commutator_defect(&s, &pb, l / 2))?;
        let rot_def = num(pullback_commutator_defect(&s, &pr, l))?;
        let round = if p.round_trip.unwrap_or(true) {
            let pinv = num(moebius_pullback(l, &boost.inverse(), p.degree))?;
            Some(num(pullback_round_trip_defect(&s, &pb, &pinv, l / 2))?)
        } else {
            None
        };
        let anti = s.cycle.anticommutator_defect();
        let inv = s.cycle.involution_defect();
        rows.push(vec![
            Cell::from(l),
            Cell::from(s.cycle.dim()),
            Cell::F(anti),
            Cell::F(inv),
            Cell::F(rot_def),
            Cell::F(boost_def),
            Cell::Opt(round),
        ]);
        report.push(json!({
            "lmax": l, "dim": s.cycle.dim(), "interior_lmax": l / 2, "degree": p.degree.unwrap_or(2 * l + 2),
            "anticommutator_defect": anti, "involution_defect": inv,
            "rotation_commutator_defect": rot_def, "boost_commutator_defect": boost_def,
            "round_trip_defect": round,
        }));
    }
    art.csv(
        "sphere.csv",
        &["lmax", "dim", "anticommutator_defect", "involution_defect", "rotation_defect", "boost_defect", "round_trip_defect"],
        rows,
    )?;
    art.json("sphere.json", &json!({"rapidity": rap, "rotation_angle": ang, "rows": report}))?;
    Ok(art.written)
}

// ---------------------------------------------------------------- summability

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummabilityParams {
    pub symbol: Option<SymbolSpec>,
    #[serde(default)]
    pub cutoffs: Option<Vec<usize>>,
    #[serde(default)]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub grid_factor: Option<usize>,
    #[serde(default)]
    pub jw_grid: Option<usize>,
    #[serde(default)]
    pub jw_finest_steps: Option<usize>,
}

fn default_p_grid() -> Vec<f64> {
    (0..26).map(|i| 0.5 + 0.1 * i as f64).collect()
}

fn summability_options(p: &SummabilityParams) -> SummabilityOptions {
    let d = SummabilityOptions::default();
    SummabilityOptions {
        tolerance: p.tolerance.unwrap_or(d.tolerance),
        grid_factor: p.grid_factor.unwrap_or(d.grid_factor),
        jw_grid: p.jw_grid.unwrap_or(d.jw_grid),
        jw_finest_steps: p.jw_finest_steps.unwrap_or(d.jw_finest_steps),
    }
}

fn write_summability(
    art: &mut Artifacts,
    a: &limitlab::kcycles::SymbolFunction,
    p: &SummabilityParams,
    extra: serde_json::Value,
) -> Result<limitlab::kcycles::SummabilityReport, CliError> {
    let ns = p.cutoffs.clone().unwrap_or_else(|| vec![32, 64, 128]);
    let ps = p.p_grid.clone().unwrap_or_else(default_p_grid);
    let opts = summability_options(p);
    let r = num(summability_threshold(a, &ns, &ps, &opts))?;
    let rows = r
        .rows
        .iter()
        .map(|row| {
            vec![Cell::from(row.n), Cell::F(row.p), Cell::F(row.schatten_norm), Cell::Opt(row.jw_integral), Cell::from(row.flags.clone())]
        })
        .collect();
    art.csv("summability.csv", &["N", "p", "schatten_norm", "jw_integral", "flags"], rows)?;
    let mut sv_rows = Vec::new();
    for &n in &ns {
        let (ep, _) = num(hardy_projections(n))?;
        let m = num(limitlab::kcycles::multiplication_operator(a, n, opts.grid_factor.max(8) * n))?;
        let c = &ep.matrix * &m.op.matrix - &m.op.matrix * &ep.matrix;
        for (i, s) in singular_values(&c).into_iter().enumerate() {
            sv_rows.push(vec![Cell::from(n), Cell::from(i), Cell::F(s)]);
        }
    }
    art.csv("singular_values.csv", &["N", "index", "singular_value"], sv_rows)?;
    let mut jw_rows = Vec::new();
    for j in &r.jw {
        for (h, v) in &j.partial {
            jw_rows.push(vec![Cell::F(j.p), Cell::F(*h), Cell::F(*v)]);
        }
    }
    art.csv("jw_scan.csv", &["p", "h", "partial_integral"], jw_rows)?;
    art.json(
        "summability.json",
        &json!({
            "cutoffs": ns, "p_grid": ps, "tolerance": opts.tolerance, "grid_factor": opts.grid_factor,
            "jw_grid": opts.jw_grid, "jw_finest_steps": opts.jw_finest_steps,
            "smoothness": format!("{:?}", a.smoothness), "provenance": a.provenance,
            "p_schatten": r.p_schatten, "p_janson_wolff": r.p_janson_wolff,
            "flags": r.flags, "low_confidence": r.low_confidence,
            "schatten_ratios": r.schatten_ratios,
            "jw": r.jw.iter().map(|j| json!({"p": j.p, "value": j.value, "ratio": j.ratio, "divergent": j.divergent})).collect::<Vec<_>>(),
            "context": extra,
        }),
    )?;
    Ok(r)
}

pub fn summability(config: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let (cfg, mut art) = start::<SummabilityParams>("summability", config, out)?;
    let spec = cfg.params.symbol.clone().ok_or_else(|| CliError::Usage("params.symbol is required".into()))?;
    let a = spec.build(1)?;
    write_summability(&mut art, &a, &cfg.params, json!({"symbol": spec}))?;
    Ok(art.written)
}

// ---------------------------------------------------------------- conjugacy

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugacyParams {
    pub target: Option<limitlab::GroupSpec>,
    #[serde(default)]
    pub depth: Option<usize>,
    /// Images of the source generators as target words.
    #[serde(default)]
    pub correspondence: Option<Vec<String>>,
    /// Word length for the target's critical exponent; skipped when absent.
    #[serde(default)]
    pub delta_depth: Option<usize>,
    /// Smooth function on the target sphere; runs the summability scan of
    /// its pullback when present.
    #[serde(default)]
    pub symbol: Option<SymbolSpec>,
    #[serde(default)]
    pub summability: Option<SummabilityParams>,
}

pub fn conjugacy(config: &Path, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let (cfg, mut art) = start::<ConjugacyParams>("conjugacy", config, out)?;
    let src = num(cfg.group()?.build())?;
    let p = &cfg.params;
    let tgt = num(p.target.as_ref().ok_or_else(|| CliError::Usage("params.target is required".into()))?.build())?;
    let depth = p.depth.unwrap_or(6);
    let corr = match &p.correspondence {
        Some(c) => Some(words(c)?),
        None => None,
    };
    let phi = num(boundary_conjugacy(&src, &tgt, corr.as_deref(), depth))?;
    let (sd, td) = (src.dim(), tgt.dim());
    let mut cols = vec!["word".to_string(), "source_angle".to_string()];
    cols.extend(coord_names("source_x", sd));
    cols.extend(coord_names("target_x", td));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let rows = phi
        .samples
        .iter()
        .map(|s| {
            let mut r = vec![Cell::from(s.word.to_string()), Cell::F(s.source_angle)];
            r.extend(coords_cells(&s.source, sd));
            r.extend(coords_cells(&s.target, td));
            r
        })
        .collect();
    art.csv("conjugacy.csv", &col_refs, rows)?;
    let target_delta = match p.delta_depth {
        Some(d) => Some(num(estimate_delta(&tgt, d, &InteriorPoint::origin(td)))?.value),
        None => None,
    };
    let threshold = match &p.symbol {
        Some(spec) => {
            let f = spec.build(td)?;
            let a = num(pushforward_symbols(&phi, &f))?;
            let sp = p.summability.as_ref().map(|s| SummabilityParams {
                symbol: None,
                cutoffs: s.cutoffs.clone(),
                p_grid: s.p_grid.clone(),
                tolerance: s.tolerance,
                grid_factor: s.grid_factor,
                jw_grid: s.jw_grid,
                jw_finest_steps: s.jw_finest_steps,
            });
            let r = write_summability(&mut art, &a, &sp.unwrap_or_default(), json!({"symbol": spec, "target_delta_hat": target_delta}))?;
            Some(json!({"p_schatten": r.p_schatten, "p_janson_wolff": r.p_janson_wolff, "smoothness": format!("{:?}", a.smoothness)}))
        }
        None => None,
    };
    art.json(
        "conjugacy.json",
        &json!({
            "depth": depth,
            "samples": phi.len(),
            "skipped": phi.skipped,
            "interpolation": phi.interpolation,
            "source_kind": format!("{:?}", phi.source_kind),
            "target_kind": format!("{:?}", phi.target_kind),
            "target_heuristic": phi.target_heuristic,
            "correspondence": phi.correspondence.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "cyclically_monotone": phi.is_cyclically_monotone(),
            "equivariance_defect": num(phi.equivariance_defect(&tgt))?,
            "interpolated_equivariance_defect": num(phi.interpolated_equivariance_defect(&src, &tgt))?,
            "target_delta_hat": target_delta,
            "threshold": threshold,
        }),
    )?;
    Ok(art.written)
}
