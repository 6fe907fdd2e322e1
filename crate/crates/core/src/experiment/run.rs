//! Executes a configured experiment and assembles its report.

use std::collections::BTreeMap;

use log::info;
use rand::Rng;
use rayon::prelude::*;

use crate::additive::{
    interval_preimage_count, mult_table_direct, mult_table_with, sarkozy_count, sarkozy_count_brute,
    sarkozy_sweep, essential_check, standard_weil_pool, tenenbaum_delta, weil_check, weil_sum,
    well_spaced_check, SolvabilityReport,
};
use crate::budget::Budget;
use crate::error::Result;
use crate::expander::{
    bourgain_counterexample, collision_energy, collision_energy_brute, cs_lower_bound,
    expansion_report, image_set, non_expander_witness, representation_counts, set_size_for,
    ExpansionReport,
};
use crate::extractor::{
    entropy_scan, exp_sums_fast, exp_sums_naive, max_relative_error, mu_census, mu_census_brute,
    mu_t_second_moment, nu_census, nu_second_moment_brute, value_histogram, ExtractorSpec,
};
use crate::field::{
    derive_seed, parse_int_poly, parse_map_spec, rng_from_seed, sample_subset, sample_subset_with,
    FpSet, IntPoly, MapSpec, PrimeField,
};
use crate::incidence::{
    incidence_count_brute, lines_from_expander_pairs, vinh_check, Hyperplane, HyperplaneSet,
    LineFamily, PointSet,
};

use super::config::{ExperimentConfig, Kind};
use super::report::{Cell, ExperimentReport, Provenance, Section};

type Summary = BTreeMap<String, Cell>;

/// Runs the experiment named by `config.kind`. Identical configurations give
/// identical reports.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let budget = Budget {
        override_limits: config.override_budget,
    };
    let mut sections = Vec::new();
    let mut summary = Summary::new();
    info!("running {} experiment with seed {}", config.kind.name(), config.seed);
    match config.kind {
        Kind::Expander => run_expander(config, &mut sections, &mut summary)?,
        Kind::Incidence => run_incidence(config, &mut sections, &mut summary)?,
        Kind::Extractor => run_extractor(config, budget, &mut sections, &mut summary)?,
        Kind::Sarkozy => run_sarkozy(config, &mut sections, &mut summary)?,
        Kind::Multtable => run_multtable(config, budget, &mut sections, &mut summary)?,
        Kind::Weil => run_weil(config, &mut sections, &mut summary)?,
        Kind::Wellspaced => run_wellspaced(config, budget, &mut sections, &mut summary)?,
    }
    Ok(ExperimentReport {
        config: config.clone(),
        sections,
        summary,
        provenance: Provenance {
            seed: config.seed,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

fn map2(text: &str) -> Result<MapSpec> {
    parse_map_spec(text, Some(2))
}

/// Every subset of `F_p` with size in `[lo, hi]`, in mask order.
fn subsets(field: &PrimeField, lo: usize, hi: usize) -> Vec<FpSet> {
    let p = field.p();
    assert!(p <= 20, "subset enumeration needs a tiny field");
    (1u64..1 << p)
        .filter(|m| (lo..=hi).contains(&(m.count_ones() as usize)))
        .map(|m| FpSet::from_elements(field, (0..p).filter(|i| m >> i & 1 == 1)))
        .collect()
}

fn add_violations(summary: &mut Summary, key: &str, n: u64) {
    let prev = summary.get(key).and_then(Cell::as_u64).unwrap_or(0);
    summary.insert(key.into(), Cell::from(prev + n));
}

// ---------------------------------------------------------------- expander

const SAMPLE_COLUMNS: [&str; 9] = [
    "p", "alpha", "trial", "sizeA", "sizeB", "imageSize", "energy", "csLowerBound", "ratio",
];

fn sample_section(name: &str, rep: &ExpansionReport) -> Section {
    let mut s = Section::new(name, &SAMPLE_COLUMNS);
    for r in &rep.samples {
        s.push(vec![
            r.p.into(),
            r.alpha.into(),
            r.trial.into(),
            r.size_a.into(),
            r.size_b.into(),
            r.image_size.into(),
            r.energy.into(),
            r.cs_lower_bound.into(),
            r.ratio.into(),
        ]);
    }
    s
}

fn run_expander(cfg: &ExperimentConfig, sections: &mut Vec<Section>, summary: &mut Summary) -> Result<()> {
    let params = cfg.expander.clone().unwrap_or_default();
    let primes = cfg.primes.resolve();
    let alpha = cfg.alphas[0];
    let map = map2(&params.map)?;

    if params.samples {
        let main = expansion_report(&map, alpha, &primes, cfg.trials, cfg.seed)?;
        sections.push(sample_section("samples", &main));
        let mut fit = Section::new(
            "fit",
            &["map", "p", "setSize", "medianLnImage", "medianLogPImage"],
        );
        let mut push_fit = |name: &str, rep: &ExpansionReport| {
            for s in &rep.per_prime {
                fit.push(vec![
                    name.into(),
                    s.p.into(),
                    s.set_size.into(),
                    s.median_ln_image.into(),
                    s.median_log_p_image.into(),
                ]);
            }
        };
        push_fit(&params.map, &main);
        summary.insert("kappa_hat".into(), Cell::opt_real(main.kappa_hat));
        if let Some(other) = &params.compare_with {
            let cmp = expansion_report(&map2(other)?, alpha, &primes, cfg.trials, cfg.seed)?;
            push_fit(other, &cmp);
            sections.push(sample_section("comparison_samples", &cmp));
            summary.insert("kappa_hat_comparison".into(), Cell::opt_real(cmp.kappa_hat));
            let exceeds = match (main.kappa_hat, cmp.kappa_hat) {
                (Some(a), Some(b)) => Cell::from(a > b),
                _ => Cell::Null,
            };
            summary.insert("kappa_exceeds".into(), exceeds);
        }
        sections.push(fit);
    }

    if let Some(ex) = &params.exhaustive {
        let mut sec = Section::new("exhaustive", &["check", "p", "map", "instances", "violations"]);
        if let Some(q) = ex.sumset_prime {
            let (n, bad) = cauchy_davenport_sweep(&PrimeField::new(q)?)?;
            sec.push(vec!["cauchy_davenport".into(), q.into(), "x + y".into(), n.into(), bad.into()]);
            add_violations(summary, "cauchy_davenport_violations", bad);
        }
        for &p in &ex.chain_primes {
            let field = PrimeField::new(p)?;
            for text in &ex.chain_maps {
                let (n, bad) = cs_chain_sweep(&map2(text)?, &field, ex.chain_max_size)?;
                sec.push(vec!["cs_chain".into(), p.into(), text.as_str().into(), n.into(), bad.into()]);
                add_violations(summary, "cs_chain_violations", bad);
            }
        }
        sections.push(sec);
    }

    if let Some(w) = &params.witnesses {
        let mut sec = Section::new(
            "witnesses",
            &["construction", "p", "param", "sizeA", "sizeB", "imageSize", "limit", "contained"],
        );
        let mut bad = 0u64;
        for &p in &w.primes {
            let field = PrimeField::new(p)?;
            for (f_text, g_text) in &w.separable {
                let f = parse_int_poly(f_text, Some('x'))?;
                let g = parse_int_poly(g_text, Some('y'))?;
                let ws = non_expander_witness(&f, &g, &field, w.alpha)?;
                let image = image_set(&MapSpec::separable_sum(&f, &g), &ws.a, &ws.b)?;
                let start = field.add(ws.shift_a, ws.shift_b);
                let window = 2 * ws.width - 1;
                let limit = 2 * ws.width + 1;
                let contained = image.iter().all(|v| field.sub(v, start) < window)
                    && image.len() as u64 <= limit;
                bad += !contained as u64;
                sec.push(vec![
                    "separable".into(),
                    p.into(),
                    format!("f={f_text};g={g_text};alpha={}", w.alpha).into(),
                    ws.a.len().into(),
                    ws.b.len().into(),
                    image.len().into(),
                    limit.into(),
                    contained.into(),
                ]);
            }
            for &k in &w.bourgain_k {
                for &u in &w.bourgain_u {
                    let mut l = 1u64;
                    while 4 * (l as u128) * (l as u128) < p as u128 {
                        let bs = bourgain_counterexample(k, u, &field, l)?;
                        let limit = mult_table_with(2 * l, Budget::ENFORCED)?.m;
                        let contained = bs.contained && bs.image_size as u64 <= limit;
                        bad += !contained as u64;
                        sec.push(vec![
                            "bourgain".into(),
                            p.into(),
                            format!("k={k};u={u};L={l}").into(),
                            bs.size_a.into(),
                            bs.size_b.into(),
                            bs.image_size.into(),
                            limit.into(),
                            contained.into(),
                        ]);
                        l += 1;
                    }
                }
            }
        }
        summary.insert("witness_instances".into(), sec.rows.len().into());
        summary.insert("witness_violations".into(), bad.into());
        sections.push(sec);
    }
    Ok(())
}

/// `|A + B| >= min(p, |A| + |B| - 1)` over all nonempty `A, B`.
fn cauchy_davenport_sweep(field: &PrimeField) -> Result<(u64, u64)> {
    let all = subsets(field, 1, field.p() as usize);
    let add = MapSpec::additive();
    let p = field.p() as usize;
    let bad: Vec<u64> = all
        .par_iter()
        .map(|a| {
            let mut bad = 0;
            for b in &all {
                let size = image_set(&add, a, b)?.len();
                bad += (size < p.min(a.len() + b.len() - 1)) as u64;
            }
            Ok(bad)
        })
        .collect::<Result<_>>()?;
    Ok(((all.len() * all.len()) as u64, bad.iter().sum()))
}

/// The chain `sum r = |A||B|`, `sum r^2 = E` (two routes) and
/// `ceil(|A|^2 |B|^2 / E) <= |F(A, B)|` over all sets up to `max` elements.
fn cs_chain_sweep(map: &MapSpec, field: &PrimeField, max: usize) -> Result<(u64, u64)> {
    let all = subsets(field, 1, max);
    let bad: Vec<u64> = all
        .par_iter()
        .map(|a| {
            let mut bad = 0;
            for b in &all {
                let r = representation_counts(map, a, b)?;
                let total: u64 = r.iter().sum();
                let energy = collision_energy(map, a, b)?;
                let squares: u128 = r.iter().map(|&c| c as u128 * c as u128).sum();
                let image = r.iter().filter(|&&c| c > 0).count() as u64;
                let lower = cs_lower_bound(a.len() as u64, b.len() as u64, energy)?;
                let ok = total == (a.len() * b.len()) as u64
                    && squares == energy
                    && energy == collision_energy_brute(map, a, b)?
                    && lower <= image;
                bad += !ok as u64;
            }
            Ok(bad)
        })
        .collect::<Result<_>>()?;
    Ok(((all.len() * all.len()) as u64, bad.iter().sum()))
}

// --------------------------------------------------------------- incidence

fn random_instance(field: &PrimeField, d: usize, np: u64, nh: u64, rng: &mut impl Rng) -> Result<(PointSet, HyperplaneSet)> {
    let p = field.p();
    let points: Vec<Vec<u64>> = (0..np)
        .map(|_| (0..d).map(|_| rng.gen_range(0..p)).collect())
        .collect();
    let mut planes = Vec::with_capacity(nh as usize);
    while (planes.len() as u64) < nh {
        let normal: Vec<u64> = (0..d).map(|_| rng.gen_range(0..p)).collect();
        let offset = rng.gen_range(0..p);
        if normal.iter().any(|&c| c != 0) {
            planes.push(Hyperplane::new(field, &normal, offset)?);
        }
    }
    Ok((PointSet::new(field, d, points)?, HyperplaneSet::new(field, d, planes)?))
}

/// Every point of `F_p^d` against every graph hyperplane
/// `x_d = a_1 x_1 + ... + a_(d-1) x_(d-1) + c`.
fn grid_instance(field: &PrimeField, d: usize) -> Result<(PointSet, HyperplaneSet)> {
    let points = PointSet::full_grid(field, d)?;
    let planes = points
        .points()
        .iter()
        .map(|coef| {
            let mut normal: Vec<u64> = coef[..d - 1].iter().map(|&a| field.neg(a)).collect();
            normal.push(1);
            Hyperplane::new(field, &normal, coef[d - 1])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((points, HyperplaneSet::new(field, d, planes)?))
}

fn run_incidence(cfg: &ExperimentConfig, sections: &mut Vec<Section>, summary: &mut Summary) -> Result<()> {
    let params = cfg.incidence.clone().unwrap_or_default();
    let mut sec = Section::new(
        "instances",
        &[
            "p", "d", "family", "instance", "points", "planes", "count", "vinhMain", "vinhError",
            "slack", "holds", "twoSidedHolds", "ratio", "bruteAgrees",
        ],
    );
    let (mut violations, mut mismatches, mut max_ratio) = (0u64, 0u64, 0f64);
    let mut record = |sec: &mut Section, p: u64, d: usize, family: &str, i: u64, pts: &PointSet, hs: &HyperplaneSet| -> Result<()> {
        let v = vinh_check(pts, hs)?;
        let brute = incidence_count_brute(pts, hs)?;
        violations += !v.holds as u64;
        mismatches += (brute != v.result.count) as u64;
        max_ratio = max_ratio.max(v.ratio);
        sec.push(vec![
            p.into(),
            d.into(),
            family.into(),
            i.into(),
            v.result.points.into(),
            v.result.planes.into(),
            v.result.count.into(),
            v.result.vinh_main.into(),
            v.result.vinh_error.into(),
            v.slack.into(),
            v.holds.into(),
            v.two_sided_holds.into(),
            v.ratio.into(),
            (brute == v.result.count).into(),
        ]);
        Ok(())
    };
    for p in cfg.primes.resolve() {
        let field = PrimeField::new(p)?;
        for &d in &params.dims {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, &[p, d as u64]));
            for i in 0..params.instances {
                let np = rng.gen_range(1..=params.max_points.max(1));
                let nh = rng.gen_range(1..=params.max_planes.max(1));
                let (pts, hs) = random_instance(&field, d, np, nh, &mut rng)?;
                record(&mut sec, p, d, "random", i, &pts, &hs)?;
            }
            if params.full_grid {
                let (pts, hs) = grid_instance(&field, d)?;
                record(&mut sec, p, d, "grid", 0, &pts, &hs)?;
            }
        }
    }
    summary.insert("instances".into(), sec.rows.len().into());
    summary.insert("vinh_violations".into(), violations.into());
    summary.insert("brute_mismatches".into(), mismatches.into());
    summary.insert("max_ratio".into(), max_ratio.into());
    sections.push(sec);

    if let Some(lf) = &params.line_family {
        let mut sec = Section::new("line_family", &["p", "size", "set", "t", "lines", "expected", "exact"]);
        let mut wrong = 0u64;
        for &p in &lf.primes {
            let field = PrimeField::new(p)?;
            for size in 2..=lf.max_size {
                let sets = if p <= 13 {
                    subsets(&field, size, size)
                } else {
                    (0..lf.sets_per_size)
                        .map(|i| sample_subset(&field, size as u64, derive_seed(cfg.seed, &[p, size as u64, i])))
                        .collect::<Result<_>>()?
                };
                for (i, a) in sets.iter().enumerate() {
                    let t = a.iter().next().expect("nonempty");
                    let lines = lines_from_expander_pairs(a, &LineFamily::Moment { t })?.len();
                    let expected = size * (size - 1);
                    wrong += (lines != expected) as u64;
                    sec.push(vec![
                        p.into(),
                        size.into(),
                        i.into(),
                        t.into(),
                        lines.into(),
                        expected.into(),
                        (lines == expected).into(),
                    ]);
                }
            }
        }
        summary.insert("line_family_sets".into(), sec.rows.len().into());
        summary.insert("line_family_mismatches".into(), wrong.into());
        sections.push(sec);
    }
    Ok(())
}

// --------------------------------------------------------------- extractor

fn extractor_spec(text: &super::config::ExtractorParams) -> Result<ExtractorSpec> {
    let h = parse_map_spec(&text.h, Some(3))?.project(&[1, 2])?;
    ExtractorSpec::new(
        parse_int_poly(&text.a, Some('z'))?,
        parse_int_poly(&text.b, Some('z'))?,
        parse_int_poly(&text.g, Some('y'))?,
        h,
    )
}

fn run_extractor(
    cfg: &ExperimentConfig,
    budget: Budget,
    sections: &mut Vec<Section>,
    summary: &mut Summary,
) -> Result<()> {
    let params = cfg.extractor.clone().unwrap_or_default();
    let spec = extractor_spec(&params)?;
    let map = spec.map();

    if params.scan {
        let scan = entropy_scan(&spec, &cfg.alphas, &cfg.primes.resolve(), cfg.trials, cfg.seed, budget)?;
        let mut rows = Section::new(
            "entropy",
            &["alpha", "p", "trial", "setSize", "spectralBias", "signBias", "c0Size"],
        );
        for r in &scan.rows {
            rows.push(vec![
                r.alpha.into(),
                r.p.into(),
                r.trial.into(),
                r.set_size.into(),
                r.spectral_bias.into(),
                r.sign_bias.into(),
                r.c0_size.into(),
            ]);
        }
        let mut fits = Section::new("entropy_fit", &["alpha", "epsilonHat", "epsilonHatSign"]);
        for f in &scan.fits {
            fits.push(vec![f.alpha.into(), Cell::opt_real(f.epsilon_hat), Cell::opt_real(f.epsilon_hat_sign)]);
        }
        sections.push(rows);
        sections.push(fits);
    }

    if !params.spectrum_primes.is_empty() {
        let mut sec = Section::new(
            "spectrum",
            &[
                "p", "sizeA", "sizeB", "sizeC", "histTotal", "s0", "s0Exact", "parsevalRelErr",
                "naiveFastRelErr",
            ],
        );
        let (mut worst_parseval, mut worst_transform, mut s0_bad) = (0f64, 0f64, 0u64);
        let alpha = cfg.alphas[0];
        for &p in &params.spectrum_primes {
            let field = PrimeField::new(p)?;
            let m = set_size_for(p, alpha).max(1);
            let draw = |stream| sample_subset(&field, m, derive_seed(cfg.seed, &[p, stream]));
            let (a, b, c) = (draw(0)?, draw(1)?, draw(2)?);
            let hist = value_histogram(&map, &a, &b, &c, budget)?;
            let total: u64 = hist.iter().sum();
            let fast = exp_sums_fast(&hist, &field);
            let naive = exp_sums_naive(&hist, &field);
            let s0 = fast.s[0];
            let expected = m * m * m;
            let s0_exact = total == expected && (s0.re - expected as f64).abs() < 0.5 && s0.im.abs() < 0.5;
            let energy: f64 = fast.s.iter().map(|v| v.norm_sqr()).sum();
            let direct: f64 = p as f64 * hist.iter().map(|&v| (v as f64).powi(2)).sum::<f64>();
            let parseval = (energy - direct).abs() / direct;
            let transform = max_relative_error(&fast.s, &naive.s, 1.0);
            worst_parseval = worst_parseval.max(parseval);
            worst_transform = worst_transform.max(transform);
            s0_bad += !s0_exact as u64;
            sec.push(vec![
                p.into(),
                m.into(),
                m.into(),
                m.into(),
                total.into(),
                s0.re.into(),
                s0_exact.into(),
                parseval.into(),
                transform.into(),
            ]);
        }
        summary.insert("s0_mismatches".into(), s0_bad.into());
        summary.insert("max_parseval_rel_err".into(), worst_parseval.into());
        summary.insert("max_transform_rel_err".into(), worst_transform.into());
        sections.push(sec);
    }

    if let Some(mp) = &params.moments {
        moment_sections(mp, budget, sections, summary)?;
    }
    Ok(())
}

fn moment_sections(
    mp: &super::config::MomentParams,
    budget: Budget,
    sections: &mut Vec<Section>,
    summary: &mut Summary,
) -> Result<()> {
    let mut nu_sec = Section::new(
        "moments_nu",
        &["p", "g", "size", "sets", "maxSecondMoment", "bound", "violations", "bruteMismatches"],
    );
    let mut mu_sec = Section::new(
        "moments_mu",
        &[
            "p", "size", "sets", "maxMu1SecondMoment", "bound", "violations", "bruteMismatches",
            "nBoundViolations", "muTMismatches", "levelViolations",
        ],
    );
    let pool = mp
        .g_pool
        .iter()
        .map(|g| Ok((g.as_str(), parse_int_poly(g, Some('y'))?)))
        .collect::<Result<Vec<(&str, IntPoly)>>>()?;
    let mut totals = [0u64; 2];
    for &p in &mp.primes {
        let field = PrimeField::new(p)?;
        for size in 1..=mp.max_size.min(p as usize) {
            let sets = subsets(&field, size, size);
            for (name, g) in &pool {
                let rows: Vec<(u128, u128, bool)> = sets
                    .par_iter()
                    .map(|b| {
                        let c = nu_census(g, b)?;
                        Ok((c.second_moment, c.bound, c.second_moment == nu_second_moment_brute(g, b)))
                    })
                    .collect::<Result<_>>()?;
                let bound = rows[0].1;
                let violations = rows.iter().filter(|r| r.0 > r.1).count() as u64;
                let mismatches = rows.iter().filter(|r| !r.2).count() as u64;
                totals[0] += violations + mismatches;
                nu_sec.push(vec![
                    p.into(),
                    (*name).into(),
                    size.into(),
                    sets.len().into(),
                    rows.iter().map(|r| r.0).max().unwrap_or(0).into(),
                    bound.into(),
                    violations.into(),
                    mismatches.into(),
                ]);
            }
            let rows: Vec<[u64; 5]> = sets
                .par_iter()
                .map(|a| {
                    let c = mu_census(a, budget)?;
                    let (mu, mu1) = mu_census_brute(a, budget)?;
                    let t = mu_t_second_moment(a, a.iter().next().expect("nonempty"))?;
                    let n4 = (a.len() as u128).pow(4);
                    Ok([
                        c.mu1_second_moment as u64,
                        (c.mu1_second_moment > 2 * n4) as u64,
                        (mu != c.mu || mu1 != c.mu1) as u64,
                        !c.n_bound_holds as u64,
                        (t.direct != t.via_incidences) as u64 * 2 + !t.levels_bounded as u64,
                    ])
                })
                .collect::<Result<_>>()?;
            let count = |i: usize| rows.iter().filter(|r| r[i] != 0).count() as u64;
            let mu_t = rows.iter().filter(|r| r[4] >= 2).count() as u64;
            let levels = rows.iter().filter(|r| r[4] % 2 == 1).count() as u64;
            totals[1] += count(1) + count(2) + count(3) + mu_t + levels;
            mu_sec.push(vec![
                p.into(),
                size.into(),
                sets.len().into(),
                rows.iter().map(|r| r[0]).max().unwrap_or(0).into(),
                (2 * (size as u128).pow(4)).into(),
                count(1).into(),
                count(2).into(),
                count(3).into(),
                mu_t.into(),
                levels.into(),
            ]);
        }
    }
    summary.insert("nu_failures".into(), totals[0].into());
    summary.insert("mu_failures".into(), totals[1].into());
    sections.push(nu_sec);
    sections.push(mu_sec);
    Ok(())
}

// ----------------------------------------------------------------- sarkozy

fn solvability_row(sec: &mut Section, label: &str, r: &SolvabilityReport) {
    sec.push(vec![
        label.into(),
        r.p.into(),
        r.trials.into(),
        r.vacuous.into(),
        r.tested.into(),
        r.min_count.map_or(Cell::Null, Cell::from),
        r.violations.len().into(),
    ]);
}

fn run_sarkozy(cfg: &ExperimentConfig, sections: &mut Vec<Section>, summary: &mut Summary) -> Result<()> {
    let params = cfg.sarkozy.clone().unwrap_or_default();
    let primes = cfg.primes.resolve();

    let mut agree = Section::new("agreement", &["p", "source", "instances", "mismatches"]);
    let mut mismatches = 0u64;
    for &p in &params.exhaustive_primes {
        let field = PrimeField::new(p)?;
        let all = subsets(&field, 1, params.exhaustive_max_size);
        // a + b and c d are symmetric, so unordered pairs cover every case
        let pairs: Vec<(usize, usize)> =
            (0..all.len()).flat_map(|i| (i..all.len()).map(move |j| (i, j))).collect();
        let bad: Vec<u64> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let mut bad = 0;
                for &(k, l) in &pairs {
                    let (a, b, c, d) = (&all[i], &all[j], &all[k], &all[l]);
                    bad += (sarkozy_count(a, b, c, d)? != sarkozy_count_brute(a, b, c, d)?) as u64;
                }
                Ok(bad)
            })
            .collect::<Result<_>>()?;
        let bad: u64 = bad.iter().sum();
        mismatches += bad;
        agree.push(vec![p.into(), "exhaustive".into(), (pairs.len() * pairs.len()).into(), bad.into()]);
    }
    if params.random_instances > 0 {
        for &p in &primes {
            let field = PrimeField::new(p)?;
            let top = params.random_max_size.min(p);
            let bad: Vec<u64> = (0..params.random_instances)
                .into_par_iter()
                .map(|i| {
                    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[p, i, 7]));
                    let sets: Vec<FpSet> = (0..4)
                        .map(|_| {
                            let m = rng.gen_range(1..=top);
                            sample_subset_with(&field, m, &mut rng)
                        })
                        .collect::<Result<_>>()?;
                    let fast = sarkozy_count(&sets[0], &sets[1], &sets[2], &sets[3])?;
                    let brute = sarkozy_count_brute(&sets[0], &sets[1], &sets[2], &sets[3])?;
                    Ok((fast != brute) as u64)
                })
                .collect::<Result<_>>()?;
            let bad: u64 = bad.iter().sum();
            mismatches += bad;
            agree.push(vec![p.into(), "random".into(), params.random_instances.into(), bad.into()]);
        }
    }
    summary.insert("agreement_mismatches".into(), mismatches.into());
    sections.push(agree);

    let columns = ["check", "p", "trials", "vacuous", "tested", "minCount", "unsolvable"];
    let mut sweep = Section::new("sweep", &columns);
    let mut unsolvable = 0u64;
    if params.sweep_trials > 0 {
        for &p in &primes {
            let r = sarkozy_sweep(&PrimeField::new(p)?, params.sweep_trials, cfg.seed)?;
            unsolvable += r.violations.len() as u64;
            solvability_row(&mut sweep, "product_above_p3", &r);
        }
    }
    if let Some(e) = &params.essential {
        let map = map2(&e.map)?;
        for &p in &primes {
            let r = essential_check(&map, &PrimeField::new(p)?, cfg.trials, cfg.seed, e.delta_prime)?;
            solvability_row(&mut sweep, "essential", &r);
        }
    }
    summary.insert("unsolvable".into(), unsolvable.into());
    sections.push(sweep);

    let mut full = Section::new("full_field", &["p", "n", "expected", "exact"]);
    let mut inexact = 0u64;
    for &p in &primes {
        let all = FpSet::full(&PrimeField::new(p)?);
        let n = sarkozy_count(&all, &all, &all, &all)?.n;
        let expected = (p as u128).pow(3);
        inexact += (n != expected) as u64;
        full.push(vec![p.into(), n.into(), expected.into(), (n == expected).into()]);
    }
    summary.insert("full_field_mismatches".into(), inexact.into());
    sections.push(full);
    Ok(())
}

// --------------------------------------------------------------- multtable

fn run_multtable(
    cfg: &ExperimentConfig,
    budget: Budget,
    sections: &mut Vec<Section>,
    summary: &mut Summary,
) -> Result<()> {
    let params = cfg.multtable.clone().unwrap_or_default();
    let mut sec = Section::new("table", &["n", "M", "direct", "ratio"]);
    let mut mismatches = 0u64;
    for n in 1..=params.n_max {
        let t = mult_table_with(n, budget)?;
        let direct = params.direct.then(|| mult_table_direct(n));
        mismatches += direct.is_some_and(|d| d != t.m) as u64;
        sec.push(vec![n.into(), t.m.into(), direct.map_or(Cell::Null, Cell::from), t.ratio.into()]);
    }
    summary.insert("mismatches".into(), mismatches.into());
    summary.insert("tenenbaum_delta".into(), tenenbaum_delta().into());
    sections.push(sec);
    Ok(())
}

// -------------------------------------------------------------------- weil

fn run_weil(cfg: &ExperimentConfig, sections: &mut Vec<Section>, summary: &mut Summary) -> Result<()> {
    let params = cfg.weil.clone().unwrap_or_default();
    let pool: Vec<IntPoly> = if params.pool.is_empty() {
        standard_weil_pool()
    } else {
        params
            .pool
            .iter()
            .map(|t| parse_int_poly(t, Some('x')))
            .collect::<Result<_>>()?
    };
    let mut sec = Section::new("sums", &["p", "degF", "h", "absS", "bound", "slack", "f", "holds"]);
    let mut gauss = Section::new("gauss", &["p", "h", "absS", "sqrtP", "relErr"]);
    let (mut violations, mut worst_gauss) = (0u64, 0f64);
    let square = IntPoly::monomial(2, 1);
    for p in cfg.primes.resolve() {
        let field = PrimeField::new(p)?;
        for f in &pool {
            let name = f.display_in('x');
            let rows: Vec<_> = (1..p).into_par_iter().map(|h| weil_check(f, h, &field)).collect::<Result<_>>()?;
            for r in rows {
                violations += !r.holds as u64;
                sec.push(vec![
                    r.p.into(),
                    r.deg_f.into(),
                    r.h.into(),
                    r.abs_s.into(),
                    Cell::opt_real(r.bound),
                    Cell::opt_real(r.slack),
                    name.as_str().into(),
                    r.holds.into(),
                ]);
            }
        }
        let sqrt_p = (p as f64).sqrt();
        for h in 1..p {
            let s = weil_sum(&square, h, &field)?.norm();
            let rel = (s - sqrt_p).abs() / sqrt_p;
            worst_gauss = worst_gauss.max(rel);
            gauss.push(vec![p.into(), h.into(), s.into(), sqrt_p.into(), rel.into()]);
        }
    }
    summary.insert("weil_rows".into(), sec.rows.len().into());
    summary.insert("weil_violations".into(), violations.into());
    summary.insert("max_gauss_rel_err".into(), worst_gauss.into());
    sections.push(sec);
    sections.push(gauss);

    if let Some(iv) = &params.interval {
        let mut sec = Section::new(
            "interval",
            &[
                "p", "f", "k", "u", "L", "count", "provedBound", "statedBound", "provedHolds",
                "statedHolds",
            ],
        );
        let (mut proved_bad, mut stated_bad) = (0u64, 0u64);
        for &p in &iv.primes {
            let field = PrimeField::new(p)?;
            for text in &iv.polys {
                let f = parse_int_poly(text, Some('x'))?;
                let k = f.degree_mod(&field).unwrap_or(0);
                for u in 0..p {
                    for l in (1..).take_while(|&l| 2 * l < p) {
                        let r = interval_preimage_count(&f, u, l, &field)?;
                        proved_bad += !r.proved_holds as u64;
                        stated_bad += !r.stated_holds as u64;
                        sec.push(vec![
                            p.into(),
                            text.as_str().into(),
                            k.into(),
                            u.into(),
                            l.into(),
                            r.count.into(),
                            r.proved_bound.into(),
                            r.stated_bound.into(),
                            r.proved_holds.into(),
                            r.stated_holds.into(),
                        ]);
                    }
                }
            }
        }
        summary.insert("interval_rows".into(), sec.rows.len().into());
        summary.insert("interval_proved_violations".into(), proved_bad.into());
        summary.insert("interval_stated_violations".into(), stated_bad.into());
        sections.push(sec);
    }
    Ok(())
}

// -------------------------------------------------------------- wellspaced

fn run_wellspaced(
    cfg: &ExperimentConfig,
    budget: Budget,
    sections: &mut Vec<Section>,
    summary: &mut Summary,
) -> Result<()> {
    let params = cfg.wellspaced.clone().unwrap_or_default();
    let map = parse_map_spec(&params.map, Some(3))?;
    let mut sec = Section::new(
        "instances",
        &[
            "p", "alpha", "instance", "u", "L", "nonempty", "T", "TFourier", "mainTerm",
            "errorBound", "implicationHolds",
        ],
    );
    let (mut failures, mut worst_fourier) = (0u64, 0f64);
    for p in cfg.primes.resolve() {
        let field = PrimeField::new(p)?;
        for i in 0..params.instances {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, &[p, i]));
            let alpha = cfg.alphas[i as usize % cfg.alphas.len()];
            let m = set_size_for(p, alpha).max(1);
            let a = sample_subset_with(&field, m, &mut rng)?;
            let b = sample_subset_with(&field, m, &mut rng)?;
            let c = sample_subset_with(&field, m, &mut rng)?;
            let u = rng.gen_range(0..p);
            let l = rng.gen_range(1..=p);
            let w = well_spaced_check(&map, &a, &b, &c, u, l, budget)?;
            // T > 0 forces a value in [u + 1, u + L]; main > error forces T > 0
            let holds = (w.t == 0 || w.nonempty) && (w.main_term <= w.error_bound || w.t > 0);
            failures += !holds as u64;
            let scale = (w.t as f64).max(1.0);
            worst_fourier = worst_fourier.max((w.t as f64 - w.t_fourier).abs() / scale);
            sec.push(vec![
                p.into(),
                alpha.into(),
                i.into(),
                u.into(),
                l.into(),
                w.nonempty.into(),
                w.t.into(),
                w.t_fourier.into(),
                w.main_term.into(),
                w.error_bound.into(),
                holds.into(),
            ]);
        }
    }
    summary.insert("implication_failures".into(), failures.into());
    summary.insert("max_fourier_rel_err".into(), worst_fourier.into());
    sections.push(sec);
    Ok(())
}
