//! Suite configuration and the checks each suite runs.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use lipfree::decomposition::{
    family_gap, log_window, separated_family_bound, verify_commuting_bap, verify_etp_identity,
    verify_pst_identity, verify_separated_inverse, AnnulusFamily, DisjointBlock,
};
use lipfree::extension::{
    amenability_defect, doubling_bound, doubling_extension_map, point_removal_map, subset_space, whitney_cover,
    PropertyCheck, DOUBLING_EXACT_THRESHOLD,
};
use lipfree::free_norm::{
    free_norm, free_norm_exact_small, free_norm_p1, free_norm_upper, Backend, Molecule, UpperConfig, FOREST_LIMIT,
};
use lipfree::geo_maps::{
    mirrored_band_residual, outward_amenability_map, radial_retraction, radius, ray_amenability_maps, snap_map,
    stereographic, verify_r_closed, verify_self_similar, xi, Scaling, SphereSample,
};
use lipfree::metric::{IntervalSpec, NormKind, PointedMetricSpace};
use lipfree::par;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::generate::GenSpec;
use crate::report::{CheckRecord, Environment, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    NormOracle,
    Decomposition,
    Whitney,
    Retraction,
    Sphere,
    CommutingBap,
    PointRemoval,
    Amenability,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::NormOracle,
        Suite::Decomposition,
        Suite::Whitney,
        Suite::Retraction,
        Suite::Sphere,
        Suite::CommutingBap,
        Suite::PointRemoval,
        Suite::Amenability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::NormOracle => "norm-oracle",
            Suite::Decomposition => "decomposition",
            Suite::Whitney => "whitney",
            Suite::Retraction => "retraction",
            Suite::Sphere => "sphere",
            Suite::CommutingBap => "commuting-bap",
            Suite::PointRemoval => "point-removal",
            Suite::Amenability => "amenability",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| CliError::BadSuite(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSource {
    /// JSON space file, or CSV with one point per row.
    File(PathBuf),
    Generated(GenSpec),
}

impl SpaceSource {
    /// `gen:<generator spec>` selects a generator, anything else is a path.
    pub fn parse(s: &str) -> Result<Self> {
        match s.strip_prefix("gen:") {
            Some(spec) => Ok(SpaceSource::Generated(GenSpec::parse(spec)?)),
            None => Ok(SpaceSource::File(PathBuf::from(s))),
        }
    }

    fn describe(&self) -> String {
        match self {
            SpaceSource::File(p) => p.display().to_string(),
            SpaceSource::Generated(g) => format!("{g:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub space: SpaceSource,
    pub p: Vec<f64>,
    pub tol_overrides: BTreeMap<String, f64>,
    /// Suite parameters such as `radix`, `samples` or `subset`.
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub exact_limit: usize,
    pub timing: bool,
}

impl SuiteConfig {
    pub fn new(suite: Suite, space: SpaceSource, p: Vec<f64>) -> Self {
        SuiteConfig {
            suite,
            space,
            p,
            tol_overrides: BTreeMap::new(),
            params: BTreeMap::new(),
            seed: 0,
            out: None,
            exact_limit: FOREST_LIMIT,
            timing: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            return Err(CliError::BadSuite("empty p list".into()));
        }
        if let Some(p) = self.p.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(CliError::BadSuite(format!("p = {p} is outside (0, 1]")));
        }
        if self.exact_limit > FOREST_LIMIT {
            return Err(CliError::Usage(format!("--exact-limit {} exceeds {FOREST_LIMIT}", self.exact_limit)));
        }
        tolerances(&self.tol_overrides)?;
        let allowed = allowed_params(self.suite);
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("suite {} takes no parameter {k:?}", self.suite.name())));
        }
        Ok(())
    }
}

fn allowed_params(suite: Suite) -> &'static [&'static str] {
    match suite {
        Suite::NormOracle => &["samples", "norm", "alpha", "base"],
        Suite::Decomposition => &["radix", "r", "gap", "samples", "block", "etp", "norm", "alpha", "base"],
        Suite::Whitney => &["subset", "norm", "alpha", "base"],
        Suite::Retraction => &["s", "radix", "samples", "norm", "alpha", "base"],
        Suite::Sphere => &["csv", "norm", "alpha", "base"],
        Suite::CommutingBap => &["radix", "m_max", "norm", "alpha", "base"],
        Suite::PointRemoval => &["x0", "norm", "alpha", "base"],
        Suite::Amenability => &["subset", "samples", "norm", "alpha", "base"],
    }
}

const TOLERANCES: [(&str, f64); 12] = [
    ("agreement", 1e-9),
    ("duality", 1e-9),
    ("isometry", 1e-9),
    ("bound", 1e-9),
    ("identity", 1e-10),
    ("partition", 1e-12),
    ("relation", 1e-12),
    ("outward", 1e-6),
    ("slack", 0.1),
    ("radius", 1e-9),
    ("mirror", 1e-12),
    ("axiom", 1e-9),
];

/// Default tolerances with `overrides` applied; unknown keys are rejected.
pub fn tolerances(overrides: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    let mut t: BTreeMap<String, f64> = TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in overrides {
        match t.get_mut(k) {
            Some(slot) if v.is_finite() && *v >= 0.0 => *slot = *v,
            Some(_) => return Err(CliError::Usage(format!("tolerance {k}={v} must be finite and nonnegative"))),
            None => return Err(CliError::Usage(format!("unknown tolerance key {k:?}"))),
        }
    }
    Ok(t)
}

struct Ctx<'a> {
    space: &'a PointedMetricSpace,
    cfg: &'a SuiteConfig,
    tol: BTreeMap<String, f64>,
    backend: Backend,
}

impl Ctx<'_> {
    fn tol(&self, key: &str) -> f64 {
        self.tol[key]
    }

    fn param<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.cfg.params.get(key) {
            Some(v) => v.parse().map_err(|_| CliError::Usage(format!("cannot parse parameter {key}={v}"))),
            None => Ok(default),
        }
    }
}

/// Reads the configured space.
pub fn load_space(cfg: &SuiteConfig) -> Result<PointedMetricSpace> {
    match &cfg.space {
        SpaceSource::Generated(g) => Ok(PointedMetricSpace::from_file(g.generate()?)?),
        SpaceSource::File(path) => {
            let name = path.display().to_string();
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: name.clone(), source })?;
            let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            let parsed = if is_csv {
                let get = |k: &str| cfg.params.get(k).map(String::as_str);
                let norm = NormKind::parse(get("norm").unwrap_or("euclidean"))?;
                let alpha = get("alpha").map(str::parse).transpose().map_err(|_| CliError::Usage("bad alpha".into()))?;
                let base = get("base").map(str::parse).transpose().map_err(|_| CliError::Usage("bad base".into()))?;
                PointedMetricSpace::from_csv(text.as_bytes(), norm, alpha.unwrap_or(1.0), base.unwrap_or(0))
            } else {
                PointedMetricSpace::from_json(&text)
            };
            parsed.map_err(|e| CliError::Parse { path: name, msg: e.to_string() })
        }
    }
}

/// Loads the space, runs every check of the suite and assembles the report.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let started = Instant::now();
    let space = load_space(cfg)?;
    let ctx = Ctx {
        space: &space,
        cfg,
        tol: tolerances(&cfg.tol_overrides)?,
        backend: Backend::Auto {
            exact_limit: cfg.exact_limit,
            upper: UpperConfig { seed: cfg.seed, ..UpperConfig::default() },
        },
    };
    let mut skipped = Vec::new();
    let checks = match cfg.suite {
        Suite::NormOracle => norm_oracle(&ctx)?,
        Suite::Decomposition => decomposition(&ctx, &mut skipped)?,
        Suite::Whitney => whitney(&ctx)?,
        Suite::Retraction => retraction(&ctx)?,
        Suite::Sphere => sphere(&ctx)?,
        Suite::CommutingBap => commuting_bap(&ctx)?,
        Suite::PointRemoval => point_removal(&ctx)?,
        Suite::Amenability => amenability(&ctx, &mut skipped)?,
    };
    let environment = Environment {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        p: cfg.p.clone(),
        exact_limit: cfg.exact_limit,
        tol_overrides: cfg.tol_overrides.clone(),
        params: cfg.params.clone(),
        timing_ms: cfg.timing.then(|| started.elapsed().as_millis() as u64),
    };
    Ok(Report {
        suite: cfg.suite.name().to_string(),
        space: cfg.space.describe(),
        points: space.len(),
        pass: checks.iter().all(|c| c.pass),
        checks,
        skipped,
        environment,
    })
}

/// Writes `report` as canonical JSON.
pub fn write_report(report: &Report, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, report.to_json()).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Runs `f` for every p in parallel, keeping the order of the p list.
fn per_p<F>(ctx: &Ctx, f: F) -> Result<Vec<CheckRecord>>
where
    F: Fn(f64) -> lipfree::Result<Vec<CheckRecord>> + Sync + Send,
{
    Ok(par::try_map(&ctx.cfg.p, |&p| f(p))?.into_iter().flatten().collect())
}

fn random_molecule(space: &PointedMetricSpace, rng: &mut ChaCha8Rng) -> lipfree::Result<Molecule> {
    let mut coeffs = Vec::new();
    for i in 0..space.len() {
        if i != space.base() && rng.gen_bool(0.5) {
            coeffs.push((i, rng.gen_range(-1.0..1.0)));
        }
    }
    if coeffs.is_empty() {
        let i = (space.base() + 1) % space.len();
        coeffs.push((i, 1.0));
    }
    Molecule::from_coeffs(space, &coeffs)
}

/// All pairs, or a seeded sample of `cap` of them.
fn sample_pairs(n: usize, cap: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut all = par::pairs(n);
    if all.len() > cap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        all.shuffle(&mut rng);
        all.truncate(cap);
        all.sort_unstable();
    }
    all
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn norm_oracle(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let s = ctx.space;
    if s.len() < 2 {
        return Err(lipfree::Error::TooSmall.into());
    }
    let samples: usize = ctx.param("samples", 50)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let molecules: Vec<Molecule> = (0..samples).map(|_| random_molecule(s, &mut rng)).collect::<lipfree::Result<_>>()?;
    let pairs = sample_pairs(s.len(), 2000, ctx.cfg.seed);
    let exact_ok = s.len() <= ctx.cfg.exact_limit;
    per_p(ctx, |p| {
        let mut out = Vec::new();
        let iso = par::try_max(&pairs, |(x, y)| {
            let v = free_norm(s, &Molecule::delta_diff(s, x, y), p, &ctx.backend)?.value;
            Ok(rel(v, s.d(x, y)))
        })?;
        out.push(
            CheckRecord::residual(format!("p={p}/delta-isometry"), iso.map_or(0.0, |b| b.0), ctx.tol("isometry"))
                .witness(iso.map(|b| b.1)),
        );
        let mut worst_repr: f64 = 0.0;
        if p == 1.0 {
            let (mut gap, mut agree): (f64, f64) = (0.0, 0.0);
            for m in &molecules {
                let r = free_norm_p1(s, m)?;
                worst_repr = worst_repr.max(r.reproduction_error(m));
                let f = r.certificate.as_ref().ok_or_else(|| lipfree::Error::Numerical("flow result has no certificate".into()))?;
                gap = gap.max(rel(m.pair(f), r.value));
                for (i, j) in par::pairs(s.len()) {
                    gap = gap.max(((f[i] - f[j]).abs() - s.d(i, j)).max(0.0) / s.d(i, j));
                }
                if exact_ok {
                    agree = agree.max(rel(free_norm_exact_small(s, m, 1.0)?.value, r.value));
                }
            }
            out.push(CheckRecord::residual("p=1/duality-gap", gap, ctx.tol("duality")));
            if exact_ok {
                out.push(CheckRecord::residual("p=1/exact-vs-flow", agree, ctx.tol("agreement")));
            }
        } else {
            let upper = UpperConfig { seed: ctx.cfg.seed, ..UpperConfig::default() };
            let mut below: f64 = 0.0;
            for m in &molecules {
                let u = free_norm_upper(s, m, p, &upper)?;
                worst_repr = worst_repr.max(u.reproduction_error(m));
                if exact_ok {
                    let e = free_norm_exact_small(s, m, p)?.value;
                    below = below.max((e - u.value).max(0.0) / e.max(f64::MIN_POSITIVE));
                }
            }
            if exact_ok {
                out.push(CheckRecord::residual(format!("p={p}/upper-dominates-exact"), below, ctx.tol("agreement")));
            }
        }
        out.push(CheckRecord::residual(format!("p={p}/representation"), worst_repr, ctx.tol("identity")));
        Ok(out)
    })
}

/// Consecutive disjoint blocks covering the log window: outer `(a, a + w + 2r)`, inner `[a + r, a + r + w]`.
fn auto_blocks(space: &PointedMetricSpace, radix: f64, r: f64, w: f64) -> lipfree::Result<Vec<DisjointBlock>> {
    let (lo, hi) = log_window(space, radix)?;
    let mut blocks = Vec::new();
    let mut a = lo - r;
    let mut id = 0;
    while a + r <= hi {
        let inner = IntervalSpec::closed(a + r, a + r + w)?;
        if !space.annulus_indices(&inner.exp_base(radix)).is_empty() {
            blocks.push(DisjointBlock { id, inner, outer: (a, a + w + 2.0 * r) });
        }
        a += w + 2.0 * r;
        id += 1;
    }
    Ok(blocks)
}

/// Closed annuli around clusters of radii, consecutive clusters at ratio at least `k`;
/// together they partition the nonbase points.
fn separated_annuli(space: &PointedMetricSpace, k: f64) -> lipfree::Result<Vec<IntervalSpec>> {
    let mut radii: Vec<f64> = (0..space.len()).filter(|&x| x != space.base()).map(|x| space.dist_to_base(x)).collect();
    radii.sort_by(f64::total_cmp);
    let mut annuli = Vec::new();
    let mut i = 0;
    while i < radii.len() {
        let mut j = i;
        while j + 1 < radii.len() && radii[j + 1] < k * radii[j] {
            j += 1;
        }
        annuli.push(IntervalSpec::closed(radii[i], radii[j])?);
        i = j + 1;
    }
    Ok(annuli)
}

fn decomposition(ctx: &Ctx, skipped: &mut Vec<String>) -> Result<Vec<CheckRecord>> {
    let s = ctx.space;
    let radix: f64 = ctx.param("radix", 2.0)?;
    let r: f64 = ctx.param("r", 0.5)?;
    let gap: f64 = ctx.param("gap", 3.0)?;
    let samples: usize = ctx.param("samples", 200)?;
    let width: f64 = ctx.param("block", 2.0)?;
    let etp: String = ctx.param("etp", "auto".to_string())?;
    let shift_two = AnnulusFamily::preset_shift_two(s, radix)?;
    let two_set = AnnulusFamily::preset_two_set(s, radix)?;
    let annuli = separated_annuli(s, gap)?;
    let blocks = auto_blocks(s, radix, r, width)?;
    let maps = match etp.as_str() {
        "off" => None,
        "auto" | "on" => match ray_amenability_maps(s, radix, &blocks) {
            Ok(m) => Some(m),
            Err(e @ (lipfree::Error::NotSigmaClosed { .. } | lipfree::Error::NotEmbedded)) if etp == "auto" => {
                skipped.push(format!("etp-identity: {e}"));
                None
            }
            Err(e) => return Err(e.into()),
        },
        other => return Err(CliError::Usage(format!("etp must be auto, on or off, got {other:?}"))),
    };
    if etp == "off" {
        skipped.push("etp-identity: disabled".into());
    }
    if annuli.len() < 2 {
        skipped.push(format!("separated-inverse: radii form fewer than two clusters at ratio {gap}"));
    }
    per_p(ctx, |p| {
        let mut out = Vec::new();
        for (name, fam, rr) in [("shift-two", &shift_two, r), ("two-set", &two_set, r.min(0.25))] {
            let rep = verify_pst_identity(s, radix, fam.intervals(), rr, p, &ctx.backend)?;
            out.push(CheckRecord::residual(format!("p={p}/{name}/pst-identity"), rep.residual, ctx.tol("identity")));
            out.push(CheckRecord::residual(
                format!("p={p}/{name}/weight-sum"),
                rep.weight_sum_error,
                ctx.tol("partition"),
            ));
            let lip = rep.partition.lipschitz.iter().copied().fold(0.0, f64::max);
            out.push(
                CheckRecord::bound(format!("p={p}/{name}/partition-lipschitz"), lip, 3.0 * rep.k as f64 / rr + 1e-9, 0.0, "3k/r + 1e-9")
                    .input("k", rep.k as f64)
                    .input("r", rr),
            );
            out.push(
                CheckRecord::bound(
                    format!("p={p}/{name}/norm-T"),
                    rep.measured_t.value,
                    rep.bound_t,
                    ctx.tol("bound"),
                    "(2k)^{1/p} (K1^p/ln^p R + max(K1^p R^p/ln^p R, K2^p R^p/(R-1)^p))^{1/p}",
                )
                .input("p", p)
                .input("k", rep.k as f64)
                .input("R", radix)
                .input("K1", rep.k1)
                .input("K2", rep.k2)
                .witness(rep.measured_t.pair),
            );
        }
        if let Some(maps) = &maps {
            let rep = verify_etp_identity(s, radix, &blocks, r, p, maps, &ctx.backend)?;
            out.push(CheckRecord::residual(format!("p={p}/etp-identity"), rep.residual, ctx.tol("identity")));
            out.push(CheckRecord::flag(format!("p={p}/etp-weights-pointwise"), rep.weights_pointwise_ok));
            out.push(
                CheckRecord::bound(format!("p={p}/etp-norm-T"), rep.measured_t.value, rep.bound_t, ctx.tol("bound"), "(2k)^{1/p} (...)^{1/p} with k=1, K1=1/r, K2=1")
                    .input("p", p)
                    .input("R", radix)
                    .input("r", r),
            );
            // E_n is the outward map at s1 followed by the radial retraction at s2
            let worst_e = rep.measured_e.iter().map(|l| l.value).fold(0.0, f64::max);
            out.push(
                CheckRecord::bound(format!("p={p}/etp-amenability"), worst_e, 2.0 * 3f64.powf(1.0 / p), ctx.tol("bound"), "2 3^{1/p}")
                    .input("p", p)
                    .input("blocks", blocks.len() as f64),
            );
        }
        if annuli.len() >= 2 {
            let rep = verify_separated_inverse(s, &annuli, p, samples, ctx.cfg.seed, &ctx.backend)?;
            let k = family_gap(&annuli);
            out.push(
                CheckRecord::bound(
                    format!("p={p}/separated-inverse"),
                    rep.max_ratio,
                    separated_family_bound(k, p)?,
                    ctx.tol("bound"),
                    "(K^p + 1)^{1/p} (K^p - 1)^{-1/p}",
                )
                .input("K", k)
                .input("p", p)
                .witness(serde_json::json!({"certified": rep.certified, "samples": rep.samples})),
            );
        }
        Ok(out)
    })
}

/// Subset selector: `half` (first coordinate at most its midrange), `line`
/// (points sharing every other coordinate with the base), `random:K`, `radius:T`.
fn select_subset(space: &PointedMetricSpace, spec: &str, seed: u64) -> Result<Vec<usize>> {
    let base = space.base();
    let mut out: Vec<usize> = match spec.split_once(':').unwrap_or((spec, "")) {
        ("half", _) => {
            let coords = space.coords().ok_or(lipfree::Error::NotEmbedded)?;
            let lo = coords.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = coords.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
            let mid = (lo + hi) / 2.0;
            (0..space.len()).filter(|&i| coords[i][0] <= mid).collect()
        }
        ("line", _) => {
            let coords = space.coords().ok_or(lipfree::Error::NotEmbedded)?;
            let b = &coords[base];
            (0..space.len()).filter(|&i| coords[i][1..] == b[1..]).collect()
        }
        ("random", k) => {
            let k: usize = k.parse().map_err(|_| CliError::Usage(format!("bad subset size in {spec:?}")))?;
            let mut rest: Vec<usize> = (0..space.len()).filter(|&i| i != base).collect();
            rest.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            rest.truncate(k);
            rest
        }
        ("radius", t) => {
            let t: f64 = t.parse().map_err(|_| CliError::Usage(format!("bad radius in {spec:?}")))?;
            (0..space.len()).filter(|&i| space.dist_to_base(i) <= t).collect()
        }
        _ => return Err(CliError::Usage(format!("unknown subset selector {spec:?}"))),
    };
    out.push(base);
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn property(id: String, c: &PropertyCheck) -> CheckRecord {
    let mut rec = CheckRecord::flag(id, c.pass).witness(serde_json::json!({"worst": c.worst, "pair": c.witness}));
    rec.bound_inputs.insert("worst".into(), c.worst);
    rec
}

fn whitney(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let s = ctx.space;
    let spec: String = ctx.param("subset", "half".to_string())?;
    let subset = select_subset(s, &spec, ctx.cfg.seed)?;
    let (_, cover) = match whitney_cover(s, &subset) {
        Ok(c) => c,
        Err(lipfree::Error::InternalInvariantBroken(msg)) => {
            return Ok(vec![CheckRecord::flag("cover", false).witness(msg)]);
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = vec![
        property("H1".into(), &cover.h1),
        property("H2".into(), &cover.h2),
        property("H3".into(), &cover.h3),
        property("H4".into(), &cover.h4),
        property("Phi-lipschitz".into(), &cover.big_phi_lipschitz),
        property("Phi-lower".into(), &cover.big_phi_lower),
        CheckRecord::bound("overlap", cover.overlap_max as f64, cover.k_bound, 0.0, "3 max(D, 2)^4")
            .input("D", cover.d_hat as f64),
    ];
    out.extend(per_p(ctx, |p| {
        let (_, rep) = doubling_extension_map(s, &subset, p, &ctx.backend)?;
        Ok(vec![
            CheckRecord::flag(format!("p={p}/crucial"), rep.crucial.pass).witness(rep.crucial.witness),
            CheckRecord::flag(format!("p={p}/weights"), rep.weights_ok),
            CheckRecord::flag(format!("p={p}/restricts-to-delta"), rep.restricts_to_delta),
            CheckRecord::residual(format!("p={p}/idempotent"), rep.idempotent_residual, ctx.tol("identity")),
            CheckRecord::bound(format!("p={p}/extension-lipschitz"), rep.lipschitz.value, rep.bound, ctx.tol("bound"), "112 15^{1/p} D^{4/p}")
                .input("p", p)
                .input("D", rep.d_eff)
                .witness(serde_json::json!({"pair": rep.lipschitz.pair, "exact": rep.lipschitz_exact})),
        ])
    })?);
    Ok(out)
}

fn median_radius(space: &PointedMetricSpace) -> Result<f64> {
    let mut radii: Vec<f64> = (0..space.len()).filter(|&x| x != space.base()).map(|x| radius(space, x)).collect();
    if radii.is_empty() {
        return Err(lipfree::Error::TooSmall.into());
    }
    radii.sort_by(f64::total_cmp);
    Ok(radii[radii.len() / 2])
}

fn retraction(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let s = ctx.space;
    let radius_s: f64 = match ctx.cfg.params.get("s") {
        Some(_) => ctx.param("s", 1.0)?,
        None => median_radius(s)?,
    };
    let radix: f64 = ctx.param("radix", 2.0)?;
    let samples: usize = ctx.param("samples", 500)?;
    let rep = radial_retraction(s, radius_s)?;
    let mut out = vec![
        CheckRecord::residual("retraction-slack", rep.slack, ctx.tol("slack"))
            .input("measured", rep.lipschitz.value)
            .input("S", radius_s)
            .witness(rep.lipschitz.pair),
        CheckRecord::flag("retraction-fixes-ball", rep.fixes_ball),
        CheckRecord::flag("retraction-idempotent", rep.idempotent),
    ];
    for sc in [Scaling::Contraction, Scaling::Dilation] {
        let a = verify_self_similar(s, sc, samples, ctx.cfg.seed)?;
        let name = match sc {
            Scaling::Contraction => "axioms-contraction",
            Scaling::Dilation => "axioms-dilation",
        };
        out.push(CheckRecord::residual(name, a.g1_worst.max(a.g2_worst).max(a.g3_worst), ctx.tol("axiom")));
    }
    // coordinates scale by R, snowflaked distances by R^alpha
    let img = snap_map(s, |v| v.iter().map(|c| radix * c).collect())?;
    let rc = verify_r_closed(s, &img, radix)?;
    out.push(CheckRecord::residual("r-closed", rc.worst_relative_error, ctx.tol("axiom")).witness(rc.witness));
    out.push(CheckRecord::flag("r-closed-base-fixed", rc.base_fixed));
    let subset: Vec<usize> = (0..s.len()).filter(|&x| x != s.base()).collect();
    out.extend(per_p(ctx, |p| {
        let (_, o) = outward_amenability_map(s, &subset, radius_s, p, &ctx.backend)?;
        Ok(vec![
            CheckRecord::bound(format!("p={p}/outward-lipschitz"), o.lipschitz.value, o.bound, ctx.tol("outward"), "3^{1/p}")
                .input("p", p)
                .input("alpha", o.alpha)
                .witness(serde_json::json!({"pair": o.lipschitz.pair, "exact": o.lipschitz_exact})),
            CheckRecord::flag(format!("p={p}/outward-restricts-to-delta"), o.restricts_to_delta),
        ])
    })?);
    Ok(out)
}

fn sphere(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let coords = ctx.space.coords().ok_or(lipfree::Error::NotEmbedded)?;
    let sample = SphereSample::new(coords.to_vec())?;
    let rep = stereographic(&sample)?;
    if let Some(path) = ctx.cfg.params.get("csv") {
        std::fs::write(path, rep.to_csv()?).map_err(|source| CliError::Io { path: path.clone(), source })?;
    }
    let half = rep.rows.iter().filter(|r| r.h == 0.5).map(|r| r.abs_error).fold(0.0, f64::max);
    Ok(vec![
        CheckRecord::residual("unit-vectors", sample.max_unit_error(), 1e-12),
        CheckRecord::residual("level-radius", rep.max_radius_error, ctx.tol("radius")),
        CheckRecord::residual("half-level", (xi(0.5) - 3f64.sqrt()).abs().max(half), ctx.tol("radius")),
        CheckRecord::residual("band", rep.band_error, ctx.tol("radius")),
        CheckRecord::flag("injective", rep.injective),
        CheckRecord::flag("monotone", rep.monotone),
        CheckRecord::residual("mirrored-band", mirrored_band_residual(&sample), ctx.tol("mirror")),
    ])
}

fn commuting_bap(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let s = ctx.space;
    let radix: f64 = ctx.param("radix", 2.0)?;
    let m_max: usize = ctx.param("m_max", 6)?;
    per_p(ctx, |p| {
        let rep = verify_commuting_bap(s, radix, m_max, p, &ctx.backend)?;
        Ok(vec![
            CheckRecord::residual(format!("p={p}/min-relation"), rep.min_relation_residual, ctx.tol("relation"))
                .witness(rep.worst),
            CheckRecord::residual(format!("p={p}/min-relation-off-diagonal"), rep.off_diagonal_residual, ctx.tol("relation")),
            CheckRecord::residual(format!("p={p}/commutator"), rep.commutator_residual, ctx.tol("relation")),
            CheckRecord::bound(format!("p={p}/sup-norm"), rep.sup_norm, rep.bound, ctx.tol("bound"), "norm_bound_T(p, 2, R, 1/R, 1)")
                .input("p", p)
                .input("R", radix)
                .input("limit", rep.limit_constant)
                .witness(serde_json::json!({"identity_from": rep.identity_from})),
        ])
    })
}

fn point_removal(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let s = ctx.space;
    let points: Vec<usize> = match ctx.cfg.params.get("x0").map(String::as_str) {
        None | Some("all") if s.len() <= 12 => (0..s.len()).collect(),
        None | Some("all") => {
            let mut v: Vec<usize> = (0..s.len()).collect();
            v.shuffle(&mut ChaCha8Rng::seed_from_u64(ctx.cfg.seed));
            v.truncate(8);
            v.sort_unstable();
            v
        }
        Some(_) => vec![ctx.param("x0", 0usize)?],
    };
    per_p(ctx, |p| {
        let (mut worst, mut arg, mut chain) = (0.0_f64, points[0], true);
        let mut bound = 0.0;
        for &x0 in &points {
            let (_, rep) = point_removal_map(s, x0, p, &ctx.backend)?;
            chain &= rep.sum_inequality_ok;
            bound = rep.bound;
            if rep.lipschitz.value > worst {
                worst = rep.lipschitz.value;
                arg = x0;
            }
        }
        Ok(vec![
            CheckRecord::bound(format!("p={p}/removal-lipschitz"), worst, bound, ctx.tol("bound"), "2^{1/p}")
                .input("p", p)
                .witness(serde_json::json!({"x0": arg, "tried": points.len()})),
            CheckRecord::flag(format!("p={p}/sum-inequality"), chain),
        ])
    })
}

fn amenability(ctx: &Ctx, skipped: &mut Vec<String>) -> Result<Vec<CheckRecord>> {
    let s = ctx.space;
    let spec: String = ctx.param("subset", "half".to_string())?;
    let samples: usize = ctx.param("samples", 100)?;
    let subset = select_subset(s, &spec, ctx.cfg.seed)?;
    let d_n = subset_space(s, &subset)?.doubling_constant_upper(DOUBLING_EXACT_THRESHOLD).value.max(2) as f64;
    let results = par::try_map(&ctx.cfg.p, |&p| amenability_defect(s, &subset, p, samples, ctx.cfg.seed, &ctx.backend))?;
    let mut out = Vec::new();
    for rep in results {
        let p = rep.p;
        if !rep.certified {
            skipped.push(format!("p={p}/amenability: norms are upper bounds only"));
            continue;
        }
        out.push(CheckRecord::residual(format!("p={p}/ratio-at-least-one"), (1.0 - rep.min_ratio).max(0.0), ctx.tol("agreement")));
        let rec = if p == 1.0 {
            CheckRecord::residual("p=1/isometric-embedding", (rep.max_ratio - 1.0).abs(), ctx.tol("agreement"))
        } else {
            CheckRecord::bound(format!("p={p}/ratio-below-extension-bound"), rep.max_ratio, doubling_bound(p, d_n), ctx.tol("bound"), "112 15^{1/p} D^{4/p}")
                .input("p", p)
                .input("D", d_n)
        };
        out.push(rec.witness(serde_json::json!({"samples": rep.samples})));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(suite: Suite, space: &str, p: &[f64]) -> SuiteConfig {
        SuiteConfig::new(suite, SpaceSource::parse(space).unwrap(), p.to_vec())
    }

    #[test]
    fn empty_p_is_bad_suite() {
        let c = cfg(Suite::NormOracle, "gen:line,n=4", &[]);
        assert!(matches!(run_suite(&c), Err(CliError::BadSuite(_))));
        assert!(matches!(Suite::parse("nope"), Err(CliError::BadSuite(_))));
    }

    #[test]
    fn norm_oracle_on_small_line() {
        let rep = run_suite(&cfg(Suite::NormOracle, "gen:random-ball,n=6,seed=3", &[1.0, 0.5])).unwrap();
        assert!(rep.pass, "{}", rep.to_json());
        assert!(rep.checks.iter().any(|c| c.id == "p=1/exact-vs-flow"));
    }

    #[test]
    fn unknown_tolerance_and_parameter_are_rejected() {
        let mut c = cfg(Suite::Sphere, "gen:sphere-fibonacci,n=10", &[1.0]);
        c.tol_overrides.insert("wat".into(), 1.0);
        assert!(matches!(run_suite(&c), Err(CliError::Usage(_))));
        let mut c = cfg(Suite::Sphere, "gen:sphere-fibonacci,n=10", &[1.0]);
        c.params.insert("radix".into(), "2".into());
        assert!(matches!(run_suite(&c), Err(CliError::Usage(_))));
    }

    #[test]
    fn subsets() {
        let s = PointedMetricSpace::from_file(GenSpec::parse("grid-zd,dim=2,lo=0,hi=4").unwrap().generate().unwrap()).unwrap();
        assert_eq!(select_subset(&s, "half", 0).unwrap().len(), 15);
        assert_eq!(select_subset(&s, "line", 0).unwrap().len(), 5);
        assert_eq!(select_subset(&s, "random:3", 0).unwrap().len(), 4);
        assert!(select_subset(&s, "blob", 0).is_err());
    }
}
