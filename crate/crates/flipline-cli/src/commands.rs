//! Execution of each command into result tables and figures.

use flipline::{kinetics, landscape, oracle, orbits, semiclassics, FliplineError, ModelParams, WellId};
use rayon::prelude::*;

use crate::config::{Command, FigureId, GridSpec, RunConfig, Spacing, SweepParameter};
use crate::error::CliError;
use crate::svg::{Arrow, Plot, Series, VLine, PALETTE};
use crate::table::{col, diag, Cell, ResultTable};

/// Named output documents of a run, written together at the end.
#[derive(Debug, Clone, Default)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
    pub tables: Vec<ResultTable>,
}

pub fn run(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let hash = cfg.hash();
    let short = cfg.short_hash();
    let mut out = Outputs::default();
    let add_table = |out: &mut Outputs, t: ResultTable| -> Result<(), CliError> {
        out.files.push((format!("{}-{short}.csv", cfg.command.name()), t.to_csv(&hash)?));
        out.tables.push(t);
        Ok(())
    };
    match cfg.command {
        Command::Landscape => add_table(&mut out, landscape_table(cfg)?)?,
        Command::Orbits => add_table(&mut out, orbits_table(cfg)?)?,
        Command::Rates => add_table(&mut out, rates_table(cfg)?)?,
        Command::Activation => add_table(&mut out, activation_table(cfg)?)?,
        Command::Sweep => add_table(&mut out, sweep_table(cfg)?)?,
        Command::Oracle => add_table(&mut out, oracle_table(cfg)?)?,
        Command::Figure => {
            let id = cfg.figure_id.expect("validated");
            let (table, mut plot) = match id {
                FigureId::Fig5 => fig5(cfg)?,
                FigureId::Fig6 => fig6(cfg)?,
                FigureId::Fig7 => fig7(cfg)?,
            };
            plot.metadata = vec![
                ("generator".into(), format!("flipline {}", env!("CARGO_PKG_VERSION"))),
                ("figure".into(), id.name().into()),
                ("config_hash".into(), hash.clone()),
            ];
            add_table(&mut out, table)?;
            out.files.push((format!("{}-{short}.svg", id.name()), plot.render()));
        }
    }
    Ok(out)
}

fn params_cells(p: &ModelParams) -> Vec<Cell> {
    vec![p.mu.into(), p.alpha_d.into(), p.lambda.into(), p.kappa.into()]
}

fn params_cols() -> Vec<crate::table::Column> {
    vec![col("mu", ""), col("alpha_d", ""), col("lambda", ""), col("kappa", "")]
}

fn opt(x: Result<f64, FliplineError>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn landscape_table(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let p = cfg.model_params()?;
    let geo = landscape::stationary_points(&p)?;
    let mut cols = params_cols();
    cols.extend([
        col("double_well", "bool"),
        col("g_c", "g"),
        col("q_c", "Q"),
        col("alpha_b", ""),
        diag("q_min_left", "Q"),
        diag("g_min_left", "g"),
        diag("omega_left", "1/t"),
        diag("q_min_right", "Q"),
        diag("g_min_right", "g"),
        diag("omega_right", "1/t"),
        diag("q_s", "Q"),
        diag("g_s", "g"),
    ]);
    let mut t = ResultTable::new("landscape", cols);
    let mut row = params_cells(&p);
    let dw = geo.require_double_well().is_ok();
    row.append(&mut vec![Cell::Int(dw as i64), geo.g_c.into(), geo.q_c.into(), geo.alpha_b.into()]);
    for well in [WellId::Left, WellId::Right] {
        row.push(opt(geo.q_min(well)).into());
        row.push(opt(geo.g_min(well)).into());
        row.push(opt(landscape::omega_at_minimum(&p, well)).into());
    }
    row.push(opt(geo.saddle().map(|s| s.q)).into());
    row.push(opt(geo.g_s()).into());
    t.push(row);
    Ok(t)
}

/// Samples of (a, b): cell midpoints, or for log spacing points clustered
/// geometrically toward both ends.
pub fn sample_interval(a: f64, b: f64, grid: &GridSpec) -> Vec<f64> {
    let n = grid.count;
    match grid.spacing {
        Spacing::Linear => (0..n).map(|k| a + (b - a) * (k as f64 + 0.5) / n as f64).collect(),
        Spacing::Log => (0..n)
            .map(|k| {
                // offset from the nearer end falls geometrically to 1e-6 of the span
                let u = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
                let off = 0.5 * 10f64.powf(-6.0 * u.abs());
                a + (b - a) * if u < 0.0 { off } else { 1.0 - off }
            })
            .collect(),
    }
}

fn well_range(cfg: &RunConfig, p: &ModelParams, well: WellId) -> Result<(f64, f64), CliError> {
    if let (Some(a), Some(b)) = (cfg.grid.start, cfg.grid.stop) {
        return Ok((a, b));
    }
    let geo = landscape::stationary_points(p)?;
    match geo.g_s() {
        Ok(gs) => Ok((geo.g_min(well)?, gs)),
        Err(_) => Err(CliError::Validation {
            violations: vec!["grid.start/grid.stop: required in the single-well regime".into()],
        }),
    }
}

fn orbits_table(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let p = cfg.model_params()?;
    let geo = landscape::stationary_points(&p)?;
    let wells: Vec<WellId> = [WellId::Left, WellId::Right].into_iter().filter(|&w| geo.exists(w)).collect();
    let mut t = ResultTable::new(
        "orbits",
        vec![
            col("well_sigma", ""),
            col("g", "g"),
            col("action", "I"),
            col("tau1", "t"),
            col("omega", "1/t"),
            col("re_tau2", "t"),
            col("im_tau2", "t"),
            col("re_tau_half", "t"),
            col("im_tau_half", "t"),
            col("re_tau_star", "t"),
            col("im_tau_star", "t"),
            col("re_tau_star_star", "t"),
            col("im_tau_star_star", "t"),
            col("r_prime", "R/g"),
        ],
    );
    let mut skipped = 0;
    for well in wells {
        let (a, b) = well_range(cfg, &p, well)?;
        let gs = sample_interval(a, b, &cfg.grid);
        let rows: Vec<Option<Vec<Cell>>> = gs
            .par_iter()
            .map(|&g| match orbits::orbit_data(&p, g, well) {
                Ok(od) => Ok(Some(vec![
                    Cell::Int(well.sigma() as i64),
                    g.into(),
                    od.action.into(),
                    od.tau1.into(),
                    od.omega.into(),
                    od.tau2.re.into(),
                    od.tau2.im.into(),
                    od.tau_half.re.into(),
                    od.tau_half.im.into(),
                    od.tau_star.re.into(),
                    od.tau_star.im.into(),
                    od.tau_star_star.re.into(),
                    od.tau_star_star.im.into(),
                    od.r_prime().into(),
                ])),
                Err(FliplineError::CriticalPoint { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_, _>>()?;
        for r in rows {
            match r {
                Some(r) => t.push(r),
                None => skipped += 1,
            }
        }
    }
    t.note("skipped_near_g_c", skipped);
    Ok(t)
}

fn rates_table(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let p = cfg.model_params()?;
    let mut t = ResultTable::new(
        "rates",
        vec![
            col("well_sigma", ""),
            col("n", ""),
            col("m", ""),
            col("g_n", "g"),
            col("action_n", "I"),
            col("omega_n", "1/t"),
            col("g_eval", "g"),
            col("rate", "1/t"),
        ],
    );
    for well in [WellId::Left, WellId::Right] {
        let ladder = semiclassics::quantize_well(&p, well)?;
        let rates = semiclassics::transition_rates(&p, &ladder)?;
        for e in &rates.entries {
            let l = &ladder.levels[e.n];
            t.push(vec![
                Cell::Int(well.sigma() as i64),
                Cell::Int(e.n as i64),
                Cell::Int(e.m as i64),
                l.g.into(),
                l.action.into(),
                l.omega.into(),
                e.g_eval.into(),
                e.rate.into(),
            ]);
        }
        t.note(format!("levels_{}", if well == WellId::Left { "left" } else { "right" }), ladder.len());
    }
    let res = kinetics::resonance_offsets(&p);
    t.note("resonance", if res.is_empty() { "none".to_string() } else { format!("{res:?}") });
    Ok(t)
}

fn activation_table(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let p = cfg.model_params()?;
    let r = kinetics::activation_result(&p)?;
    let est = kinetics::switching_rate_estimate(&p)?;
    let mut cols = params_cols();
    cols.extend([
        col("r_a_left", "R"),
        col("r_a_right", "R"),
        col("delta_r_a", "R"),
        col("population_ratio_exponent", ""),
        col("exponent_left", ""),
        col("exponent_right", ""),
        col("switching_rate_left", "1/t"),
        col("switching_rate_right", "1/t"),
        diag("r_prime_min_left", "R/g"),
        diag("r_prime_min_right", "R/g"),
    ]);
    let mut t = ResultTable::new("activation", cols);
    let mut row = params_cells(&p);
    row.append(&mut vec![
        r.r_a_left.into(),
        r.r_a_right.into(),
        r.delta_r_a.into(),
        r.population_ratio_exponent.into(),
        r.switching_exponent_left.into(),
        r.switching_exponent_right.into(),
        est[0].rate.into(),
        est[1].rate.into(),
        opt(kinetics::r_prime_at_minimum(&p, WellId::Left)).into(),
        opt(kinetics::r_prime_at_minimum(&p, WellId::Right)).into(),
    ]);
    t.push(row);
    t.note("prefactor", "kappa (order of magnitude only)");
    Ok(t)
}

fn sweep_table(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let sweep = cfg.sweep.expect("validated");
    let base = cfg.model_params()?;
    let values = sweep.values();
    let rows: Vec<(f64, Vec<Cell>)> = values
        .par_iter()
        .map(|&v| -> Result<(f64, Vec<Cell>), CliError> {
            let p = match sweep.parameter {
                SweepParameter::Mu => base.with_mu(v),
                SweepParameter::AlphaD => base.with_alpha(v),
                SweepParameter::Lambda => base.with_lambda(v),
                SweepParameter::Kappa => base.with_kappa(v),
            };
            p.validate()?;
            let geo = landscape::stationary_points(&p)?;
            let mut row = vec![Cell::Num(v)];
            row.extend(params_cells(&p));
            let dw = geo.require_double_well().is_ok();
            row.append(&mut vec![Cell::Int(dw as i64), geo.g_c.into()]);
            row.push(opt(geo.g_s()).into());
            row.push(opt(geo.g_min(WellId::Left)).into());
            row.push(opt(geo.g_min(WellId::Right)).into());
            if dw {
                let r = kinetics::activation_result(&p)?;
                row.append(&mut vec![
                    r.r_a_left.into(),
                    r.r_a_right.into(),
                    r.delta_r_a.into(),
                    r.switching_exponent_left.into(),
                    r.switching_exponent_right.into(),
                ]);
            } else {
                row.append(&mut vec![Cell::Num(f64::NAN); 5]);
            }
            Ok((v, row))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = rows;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cols = vec![col("value", "")];
    cols.extend(params_cols());
    cols.extend([
        col("double_well", "bool"),
        col("g_c", "g"),
        diag("g_s", "g"),
        diag("g_min_left", "g"),
        diag("g_min_right", "g"),
        diag("r_a_left", "R"),
        diag("r_a_right", "R"),
        diag("delta_r_a", "R"),
        diag("exponent_left", ""),
        diag("exponent_right", ""),
    ]);
    let mut t = ResultTable::new("sweep", cols);
    t.note(
        "sweep_parameter",
        match sweep.parameter {
            SweepParameter::Mu => "mu",
            SweepParameter::AlphaD => "alpha_d",
            SweepParameter::Lambda => "lambda",
            SweepParameter::Kappa => "kappa",
        },
    );
    for (_, r) in rows {
        t.push(r);
    }
    Ok(t)
}

fn oracle_table(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let p = cfg.model_params()?;
    let s = oracle::build_and_diagonalize(&p, None)?;
    let pauli = oracle::pauli_steady_state(&s, p.kappa)?;
    let mut t = ResultTable::new(
        "oracle",
        vec![
            col("index", ""),
            col("energy", "g"),
            col("well_sigma", ""),
            col("q_expect", "Q"),
            col("label_margin", ""),
            col("rho", ""),
        ],
    );
    for k in 0..s.eigenvalues.len() {
        let sigma = match s.well_labels[k] {
            oracle::WellLabel::Left => -1,
            oracle::WellLabel::Right => 1,
            oracle::WellLabel::Delocalized => 0,
        };
        t.push(vec![
            Cell::Int(k as i64),
            s.eigenvalues[k].into(),
            Cell::Int(sigma),
            s.q_expect[k].into(),
            s.label_margin[k].into(),
            pauli.rho[k].into(),
        ]);
    }
    t.note("dimension", s.dimension);
    t.note("tail", format!("{:e}", s.tail));
    t.note("g_s", format!("{:.16e}", s.g_s));
    t.note("raw_slowest_rate", format!("{:.16e}", pauli.raw_slowest_rate));
    match pauli.slowest_rate {
        Some(r) => t.note("slowest_rate", format!("{r:.16e}")),
        None => t.note("slowest_rate", format!("flagged (resonance m = {:?})", pauli.resonance)),
    }
    Ok(t)
}

fn classical(cfg: &RunConfig, mu: f64, alpha: f64) -> ModelParams {
    ModelParams::classical(mu, alpha).with_tolerances(cfg.tolerances)
}

fn fig5(cfg: &RunConfig) -> Result<(ResultTable, Plot), CliError> {
    let p = classical(cfg, cfg.params.mu, cfg.params.alpha_d);
    let geo = landscape::stationary_points(&p)?;
    geo.require_double_well()?;
    let deep = WellId::deep(p.alpha_d);
    let (a, b) = (geo.g_min(deep)?, geo.g_s()?);
    let g_sh = geo.g_min(deep.other())?;
    let span = b - a;
    let mut gs = sample_interval(a, b, &cfg.grid);
    // resolve the logarithmic features
    for k in 2..=7 {
        let d = span * 10f64.powi(-k);
        gs.push(a + d);
        for c in [g_sh, geo.g_c] {
            if c - d > a {
                gs.push(c - d);
            }
            if c + d < b {
                gs.push(c + d);
            }
        }
    }
    gs.sort_by(|x, y| x.total_cmp(y));
    gs.dedup();
    let pts: Vec<Option<(f64, f64, f64)>> = gs
        .par_iter()
        .map(|&g| match orbits::orbit_data(&p, g, deep) {
            Ok(od) => Ok(Some((g, od.tau2.im, od.r_prime()))),
            Err(FliplineError::CriticalPoint { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;
    let pts: Vec<(f64, f64, f64)> = pts.into_iter().flatten().collect();
    let mut t = ResultTable::new("fig5", vec![col("g", "g"), col("im_tau2", "t"), col("r_prime", "R/g")]);
    for &(g, i, r) in &pts {
        t.push(vec![g.into(), i.into(), r.into()]);
    }
    t.note("g_min_deep", format!("{a:.16e}"));
    t.note("g_min_shallow", format!("{g_sh:.16e}"));
    t.note("g_c", format!("{:.16e}", geo.g_c));
    // vertical range from the smooth stretches (the divergences leave the frame)
    let mut vals: Vec<f64> = pts.iter().flat_map(|&(_, i, r)| [i, r]).filter(|v| v.is_finite()).collect();
    vals.sort_by(|x, y| x.total_cmp(y));
    let top = vals[(0.9 * (vals.len() - 1) as f64) as usize] * 1.3;
    let bottom = vals[0].min(0.0);
    let plot = Plot {
        title: format!("Imaginary period and R′ (μ = {}, α_d = {})", p.mu, p.alpha_d),
        x_label: "g".into(),
        y_label: "Im τ_p^(2),  R′(g)".into(),
        series: vec![
            Series {
                id: "im_tau2".into(),
                label: "Im τ_p^(2)".into(),
                points: pts.iter().map(|&(g, i, _)| (g, i)).collect(),
                color: PALETTE[0],
                dashed: false,
                markers: false,
            },
            Series {
                id: "r_prime".into(),
                label: "R′(g)".into(),
                points: pts.iter().map(|&(g, _, r)| (g, r)).collect(),
                color: PALETTE[1],
                dashed: true,
                markers: false,
            },
        ],
        vlines: vec![
            VLine { id: "g_min_deep".into(), x: a, label: "g_min (deep)".into() },
            VLine { id: "g_min_shallow".into(), x: g_sh, label: "g_min (shallow)".into() },
            VLine { id: "g_c".into(), x: geo.g_c, label: format!("g_c = {:.4}", geo.g_c) },
        ],
        x_range: Some((a, b)),
        y_range: Some((bottom, top)),
        ..Default::default()
    };
    Ok((t, plot))
}

pub const FIG6_MU: [f64; 3] = [-0.5, 0.1, 0.5];

fn fig6(cfg: &RunConfig) -> Result<(ResultTable, Plot), CliError> {
    let mus: Vec<f64> = if cfg.params.mu.is_finite() { vec![cfg.params.mu] } else { FIG6_MU.to_vec() };
    let n = cfg.grid.count;
    let mut jobs = Vec::new();
    for &mu in &mus {
        let ab = landscape::bifurcation_amplitude(mu)?;
        for k in 0..n {
            jobs.push((mu, 0.995 * ab * k as f64 / (n - 1) as f64));
        }
    }
    let results: Vec<(f64, f64, f64, f64)> = jobs
        .par_iter()
        .map(|&(mu, a)| {
            let p = classical(cfg, mu, a);
            let deep = WellId::deep(a);
            let rd = kinetics::activation_energy(&p, deep)?;
            let rs = kinetics::activation_energy(&p, deep.other())?;
            Ok((mu, a, rd, rs))
        })
        .collect::<Result<_, CliError>>()?;
    let arrows: Vec<(f64, f64)> = mus
        .par_iter()
        .filter(|&&mu| mu > 0.0 && mu < landscape::bifurcation_amplitude(mu).unwrap_or(0.0))
        .map(|&mu| {
            let p = classical(cfg, mu, mu);
            Ok((mu, kinetics::activation_energy(&p, WellId::deep(mu).other())?))
        })
        .collect::<Result<_, CliError>>()?;
    let mut t = ResultTable::new("fig6", vec![col("mu", ""), col("alpha_d", ""), col("r_a_deep", "R"), col("r_a_shallow", "R")]);
    for &(mu, a, rd, rs) in &results {
        t.push(vec![mu.into(), a.into(), rd.into(), rs.into()]);
    }
    let mut series = Vec::new();
    for (k, &mu) in mus.iter().enumerate() {
        let rows: Vec<&(f64, f64, f64, f64)> = results.iter().filter(|r| r.0 == mu).collect();
        let color = PALETTE[k % PALETTE.len()];
        series.push(Series {
            id: format!("deep_mu{mu}"),
            label: format!("R_A deep, μ = {mu}"),
            points: rows.iter().map(|r| (r.1, r.2)).collect(),
            color,
            dashed: false,
            markers: false,
        });
        series.push(Series {
            id: format!("shallow_mu{mu}"),
            label: format!("R_A shallow, μ = {mu}"),
            points: rows.iter().map(|r| (r.1, r.3)).collect(),
            color,
            dashed: true,
            markers: false,
        });
    }
    let plot = Plot {
        title: "Activation energies of the two wells".into(),
        x_label: "α_d".into(),
        y_label: "R_A".into(),
        series,
        arrows: arrows
            .iter()
            .map(|&(mu, y)| Arrow { id: format!("mu{mu}"), x: mu, y, label: format!("α_d = μ = {mu}") })
            .collect(),
        ..Default::default()
    };
    Ok((t, plot))
}

pub const FIG7_CHECK_MU: [f64; 4] = [-0.5, 0.25, 0.5, 1.0];

fn fig7(cfg: &RunConfig) -> Result<(ResultTable, Plot), CliError> {
    let n = cfg.grid.count;
    let half = n / 2;
    let branch = |lo: f64, hi: f64, m: usize| -> Vec<f64> { (0..m).map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64).collect() };
    let neg = branch(-0.995, -0.05, half.max(2));
    let pos = branch(0.05, 2.0, (n - half).max(2));
    let curve = |mus: &[f64]| -> Result<Vec<(f64, f64)>, CliError> {
        mus.iter().map(|&mu| Ok((mu, kinetics::log_susceptibility(mu)?))).collect()
    };
    let (cn, cp) = (curve(&neg)?, curve(&pos)?);
    // finite-difference check points from the activation integral
    let da = 1e-3;
    let check_mu: Vec<f64> = if cfg.params.mu.is_finite() { vec![cfg.params.mu] } else { FIG7_CHECK_MU.to_vec() };
    let fd: Vec<(f64, f64)> = check_mu
        .par_iter()
        .map(|&mu| {
            let r0 = kinetics::activation_energy(&classical(cfg, mu, 0.0), WellId::Right)?;
            let r1 = kinetics::activation_energy(&classical(cfg, mu, da), WellId::Right)?;
            Ok((mu, (r1 - r0) / da))
        })
        .collect::<Result<_, CliError>>()?;
    let mut t = ResultTable::new("fig7", vec![col("mu", ""), col("r_a1", ""), diag("r_a1_finite_difference", "")]);
    let mut rows: Vec<(f64, f64, f64)> = cn.iter().chain(&cp).map(|&(m, r)| (m, r, f64::NAN)).collect();
    for &(mu, v) in &fd {
        rows.push((mu, kinetics::log_susceptibility(mu)?, v));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.is_nan().cmp(&b.2.is_nan())));
    for (m, r, f) in rows {
        t.push(vec![m.into(), r.into(), f.into()]);
    }
    let plot = Plot {
        title: "Logarithmic susceptibility".into(),
        x_label: "μ".into(),
        y_label: "R_A^(1)".into(),
        series: vec![
            Series { id: "closed_form_below".into(), label: "closed form, μ < 0".into(), points: cn, color: PALETTE[0], dashed: false, markers: false },
            Series { id: "closed_form_above".into(), label: "closed form, μ > 0".into(), points: cp, color: PALETTE[0], dashed: false, markers: false },
            Series { id: "finite_difference".into(), label: "finite difference of R_A".into(), points: fd, color: PALETTE[1], dashed: false, markers: true },
        ],
        x_range: Some((-1.0, 2.0)),
        y_range: Some((0.0, 3.5)),
        ..Default::default()
    };
    Ok((t, plot))
}
