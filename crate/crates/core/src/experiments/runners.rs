use rand::Rng;

use super::{derive_rng, derive_seed, Cell, Context, ExperimentSpec, KeySpec, PlotSpec, ResultTable};
use crate::approximants::{cramer_linear_count, hb_weights, AffineForm, CramerWeight, IntegerBox, MangoldtApproximant};
use crate::arith::{build_sieve, log_bracket, SieveTable};
use crate::averaging::{avg_upper, improving_ratio, improving_ratio_interval_l2};
use crate::error::{MlabError, Result};
use crate::gowers::{little_u_lower_with, u_full_norm, LittleSearch};
use crate::padic::bilinear_norm_search;
use crate::poly::IntPolynomial;
use crate::series::WindowedSeries;
use crate::symbols::{m0_error, progression_mean_error, weyl_sum_primes};

const fn key(name: &'static str, default: &'static str, doc: &'static str) -> KeySpec {
    KeySpec { name, default, doc }
}

pub(super) static REGISTRY: &[ExperimentSpec] = &[
    ExperimentSpec {
        name: "gowers_stability",
        description: "U^{d+1}[N] norm of Λ_Cr,w − Λ_Cr,z over a (w, z) grid",
        keys: &[
            key("n", "100000", "interval length N"),
            key("d", "1", "degree d (norm U^{d+1})"),
            key("w_values", "4,8,16,32,64", "sieve levels w (rows)"),
            key("z_values", "2,8,64", "sieve levels z (one column each)"),
        ],
        run: gowers_stability,
    },
    ExperimentSpec {
        name: "cramer_hb_comparison",
        description: "little-u lower bound and full U norm of Λ_Cr,w − Λ_HB,w over w",
        keys: &[
            key("n", "100000", "interval length N"),
            key("d", "1", "phase degree d"),
            key("w_values", "10,30,100", "levels w (Heath-Brown cutoff Q = w)"),
            key("q_max", "12", "largest denominator on the phase grid"),
            key("grid", "5", "offsets per rational on the phase grid"),
            key("refine_steps", "40", "coordinate-ascent steps per candidate"),
        ],
        run: cramer_hb_comparison,
    },
    ExperimentSpec {
        name: "approximant_uniformity",
        description: "little-u lower bound of Λ − Λ_N on [N] over N",
        keys: &[
            key("n_values", "1000,10000,100000", "scales N"),
            key("c0", "2", "level exponent C0 in w = exp(Log^{1/C0} N)"),
            key("d", "1", "phase degree d"),
            key("q_max", "12", "largest denominator on the phase grid"),
            key("grid", "5", "offsets per rational on the phase grid"),
            key("refine_steps", "40", "coordinate-ascent steps per candidate"),
        ],
        run: approximant_uniformity,
    },
    ExperimentSpec {
        name: "major_arc_m0",
        description: "|M₀| over N for a list of α₂ with ξ₁ = s₁/N, ξ₂ = s₂/N^d",
        keys: &[
            key("n_values", "1000,10000,100000,1000000", "scales N"),
            key("c0", "2", "level exponent C0"),
            key("poly", "0,0,1", "coefficients c_0,c_1,… of P"),
            key("alpha1", "0/1", "α₁ as a/q"),
            key("alpha2_values", "0/1,1/2", "α₂ values as a/q (one column each)"),
            key("xi1_scale", "0.5", "s₁ with ξ₁ = s₁/N"),
            key("xi2_scale", "0", "s₂ with ξ₂ = s₂/N^d"),
            key("force", "false", "evaluate even when a denominator has a prime factor above w"),
        ],
        run: major_arc_m0,
    },
    ExperimentSpec {
        name: "progression_means",
        description: "progression_mean_error of Λ_N on (N/2, N] over N and q",
        keys: &[
            key("n_values", "100000,1000000", "scales N"),
            key("moduli", "1,3,4,5", "moduli q (one column each)"),
            key("residue", "1", "residue class a"),
            key("c0", "2", "level exponent C0"),
        ],
        run: progression_means,
    },
    ExperimentSpec {
        name: "moment_growth",
        description: "E_{n∈[N]} |Λ_HB,Q(n)|^k and its ratio to ⟨Log Q⟩^{2^k+k}",
        keys: &[
            key("q_values", "10,100,1000", "cutoffs Q"),
            key("n", "100000", "averaging range N"),
            key("k_values", "1,2,3", "moment orders k"),
        ],
        run: moment_growth,
    },
    ExperimentSpec {
        name: "padic_contraction",
        description: "searched lower bound of ‖Avg_{Z_p×}‖_{L²×L²→L^q} at level j over (p, q)",
        keys: &[
            key("p_values", "3,5,7,11,13", "primes p"),
            key("q_values", "2.2,3", "target exponents q (one column each)"),
            key("j", "2", "level j (ring Z/p^jZ)"),
            key("degree", "2", "P(n) = n^degree"),
            key("restarts", "20", "random restarts per grid point"),
        ],
        run: padic_contraction,
    },
    ExperimentSpec {
        name: "single_scale_decay",
        description: "‖Ã_{N,Λ−Λ_N}(f,g)‖₁/(‖f‖₂‖g‖₂) for random ±1 f, g on windows of length N^d",
        keys: &[
            key("log2_n_values", "6,7,8,9,10", "log₂ of the scales N"),
            key("c0", "2", "level exponent C0"),
            key("degree", "2", "P(n) = n^degree"),
        ],
        run: single_scale_decay,
    },
    ExperimentSpec {
        name: "prime_weyl",
        description: "E_{n∈[N]} Λ(n) e(α n^d) over N",
        keys: &[
            key("n_values", "1000,10000,100000,1000000", "scales N"),
            key("alpha", "1.4142135623730951", "frequency α"),
            key("degree", "2", "P(n) = n^degree"),
        ],
        run: prime_weyl,
    },
    ExperimentSpec {
        name: "improving_sweep",
        description: "improving_ratio with f = 1_{[N^d]} over N",
        keys: &[
            key("n_values", "100,1000,10000", "scales N"),
            key("c0", "2", "level exponent C0"),
            key("degree", "2", "Q(n) = n^degree"),
            key("p", "2", "exponent p in (1, 2]"),
        ],
        run: improving_sweep,
    },
    ExperimentSpec {
        name: "linear_equations",
        description: "Cramér-weighted counts of linear patterns against the local-factor prediction",
        keys: &[
            key("system", "ap3", "pattern: twin (n, n+2), ap3 or ap4 (arithmetic progressions)"),
            key("n", "1000", "box side length"),
            key("z_values", "3,5,7,11,13", "sieve levels z (same for every form)"),
        ],
        run: linear_equations,
    },
];

/// Renames the parameter of a scale-guard refusal to the config key.
fn tag(key: &'static str) -> impl Fn(MlabError) -> MlabError {
    move |e| match e {
        MlabError::UnsupportedScale { param, detail } => MlabError::UnsupportedScale {
            param: key.to_string(),
            detail: format!("{param}: {detail}"),
        },
        other => other,
    }
}

fn num_label(v: f64) -> String {
    super::format_number(v).trim_end_matches(".0").to_string()
}

fn cols(first: &[&str], rest: impl IntoIterator<Item = String>) -> Vec<String> {
    first.iter().map(|s| s.to_string()).chain(rest).collect()
}

fn plot(x: &str, ys: &[String], log_x: bool, log_y: bool) -> PlotSpec {
    PlotSpec { x: x.into(), ys: ys.to_vec(), log_x, log_y }
}

fn sieve_for(limit: u64, key: &'static str) -> Result<SieveTable> {
    build_sieve(limit.max(1000)).map_err(tag(key))
}

fn gowers_stability(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let n = p.u64("n")? as usize;
    let d = p.u32("d")?;
    let ws = p.list_f64("w_values")?;
    let zs = p.list_f64("z_values")?;
    let top = ws.iter().chain(&zs).cloned().fold(2.0, f64::max);
    let sieve = sieve_for(top.ceil() as u64, "w_values")?;
    let eval = |lvl: f64| -> Result<Vec<f64>> { Ok(CramerWeight::new(lvl, &sieve)?.eval_range(1, n)) };
    let zcols: Vec<String> = zs.iter().map(|z| format!("z={}", num_label(*z))).collect();
    let mut t = ResultTable::new(cols(&["w"], zcols.clone()));
    let zvals: Vec<Vec<f64>> = zs.iter().map(|&z| eval(z)).collect::<Result<_>>().map_err(tag("z_values"))?;
    for &w in &ws {
        let wv = eval(w).map_err(tag("w_values"))?;
        let mut row = vec![Cell::Num(w)];
        for zv in &zvals {
            let diff: Vec<f64> = wv.iter().zip(zv).map(|(a, b)| a - b).collect();
            let f = WindowedSeries::from_real(1, &diff)?;
            row.push(Cell::Num(u_full_norm(&f, n, d).map_err(tag("n"))?));
        }
        t.push(row)?;
    }
    Ok((t, plot("w", &zcols, true, false)))
}

fn search_opts(ctx: &Context) -> Result<LittleSearch> {
    let p = &ctx.params;
    Ok(LittleSearch {
        q_max: p.u64("q_max")?,
        grid: p.u64("grid")? as usize,
        refine_steps: p.u64("refine_steps")? as usize,
        ..LittleSearch::default()
    })
}

fn cramer_hb_comparison(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let n = p.u64("n")?;
    let d = p.u32("d")?;
    let ws = p.list_u64("w_values")?;
    let opts = search_opts(ctx)?;
    let sieve = sieve_for(n.max(*ws.iter().max().unwrap_or(&2)), "n")?;
    let mut t = ResultTable::new(cols(&["w", "little_u", "full_u"], []));
    for &w in &ws {
        let cr = CramerWeight::new(w as f64, &sieve).map_err(tag("w_values"))?.eval_range(1, n as usize);
        let hb = hb_weights(w, &sieve).map_err(tag("w_values"))?.eval_range(n);
        let diff: Vec<f64> = (0..n as usize).map(|i| cr[i] - hb[i + 1]).collect();
        let f = WindowedSeries::from_real(1, &diff)?;
        let (little, _) = little_u_lower_with(&f, n as usize, d, opts).map_err(tag("n"))?;
        let full = u_full_norm(&f, n as usize, d).map_err(tag("n"))?;
        t.push(vec![(w as f64).into(), little.into(), full.into()])?;
    }
    Ok((t, plot("w", &["little_u".into(), "full_u".into()], true, true)))
}

fn approximant_uniformity(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let ns = p.list_u64("n_values")?;
    let c0 = p.u32("c0")?;
    let d = p.u32("d")?;
    let opts = search_opts(ctx)?;
    let sieve = sieve_for(*ns.iter().max().unwrap_or(&1), "n_values")?;
    let mut t = ResultTable::new(cols(&["N", "level_w", "little_u"], []));
    for &n in &ns {
        let lam = sieve.mangoldt_values(n).map_err(tag("n_values"))?;
        let approx = MangoldtApproximant::new(n as f64, c0, &sieve).map_err(tag("n_values"))?;
        let cw = approx.cramer().eval_range(1, n as usize);
        let diff: Vec<f64> = (0..n as usize).map(|i| lam[i + 1] - cw[i]).collect();
        let f = WindowedSeries::from_real(1, &diff)?;
        let (little, _) = little_u_lower_with(&f, n as usize, d, opts).map_err(tag("n_values"))?;
        t.push(vec![(n as f64).into(), approx.level().into(), little.into()])?;
    }
    Ok((t, plot("N", &["little_u".into()], true, true)))
}

fn major_arc_m0(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let ns = p.list_u64("n_values")?;
    let c0 = p.u32("c0")?;
    let poly = p.poly("poly")?;
    let a1 = *p.list_rational("alpha1")?.first().ok_or_else(|| MlabError::Config("alpha1 is empty".into()))?;
    let a2s = p.list_rational("alpha2_values")?;
    let (s1, s2) = (p.f64("xi1_scale")?, p.f64("xi2_scale")?);
    let force = p.bool("force")?;
    let sieve = sieve_for(100_000, "n_values")?;
    let ycols: Vec<String> = a2s.iter().map(|a| format!("m0_a2={}/{}", a.numerator(), a.denominator())).collect();
    let mut t = ResultTable::new(cols(&["N", "level_w"], ycols.clone()).into_iter().chain(["preconditions_ok".to_string()]).collect());
    let deg = poly.degree() as i32;
    for &n in &ns {
        let nf = n as f64;
        let approx = MangoldtApproximant::new(nf, c0, &sieve).map_err(tag("n_values"))?;
        let mut row = vec![Cell::Num(nf), Cell::Num(approx.level())];
        let mut ok = true;
        for &a2 in &a2s {
            let e = m0_error(n, c0, a1, a2, s1 / nf, s2 / nf.powi(deg), &poly, None, force, &sieve).map_err(tag("n_values"))?;
            ok &= e.precondition_ok;
            row.push(Cell::Num(e.value.norm()));
        }
        row.push(Cell::from(ok));
        t.push(row)?;
    }
    Ok((t, plot("N", &ycols, true, true)))
}

fn progression_means(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let ns = p.list_u64("n_values")?;
    let qs = p.list_u64("moduli")?;
    let a = p.u64("residue")? as i64;
    let c0 = p.u32("c0")?;
    let sieve = sieve_for(100_000, "n_values")?;
    let ycols: Vec<String> = qs.iter().map(|q| format!("q={q}")).collect();
    let mut t = ResultTable::new(cols(&["N", "level_w"], ycols.clone()));
    for &n in &ns {
        if n < 2 {
            return Err(MlabError::Config("parameter `n_values`: N must be at least 2".into()));
        }
        let level = MangoldtApproximant::new(n as f64, c0, &sieve).map_err(tag("n_values"))?.level();
        let mut row = vec![Cell::Num(n as f64), Cell::Num(level)];
        for &q in &qs {
            let e = progression_mean_error(n, c0, q, a, (n / 2 + 1, n), &sieve).map_err(tag("n_values"))?;
            row.push(Cell::Num(e));
        }
        t.push(row)?;
    }
    Ok((t, plot("N", &ycols, true, true)))
}

fn moment_growth(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let qs = p.list_u64("q_values")?;
    let n = p.u64("n")?;
    let ks = p.list_u64("k_values")?;
    let sieve = sieve_for(qs.iter().copied().max().unwrap_or(2).max(n), "n")?;
    let mcols: Vec<String> = ks.iter().map(|k| format!("moment_k={k}")).collect();
    let rcols: Vec<String> = ks.iter().map(|k| format!("ratio_k={k}")).collect();
    let mut t = ResultTable::new(cols(&["Q", "log_bracket"], mcols.iter().chain(&rcols).cloned()));
    for &q in &qs {
        let vals = hb_weights(q, &sieve).map_err(tag("q_values"))?.eval_range(n);
        let br = log_bracket(q as f64)?;
        let moments: Vec<f64> = ks
            .iter()
            .map(|&k| vals[1..].iter().map(|v| v.abs().powi(k as i32)).sum::<f64>() / n as f64)
            .collect();
        let ratios: Vec<f64> = ks
            .iter()
            .zip(&moments)
            .map(|(&k, m)| m / br.powi((1i32 << k) + k as i32))
            .collect();
        let row = [q as f64, br].into_iter().chain(moments).chain(ratios).map(Cell::Num).collect();
        t.push(row)?;
    }
    Ok((t, plot("Q", &rcols, true, true)))
}

fn padic_contraction(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let ps = p.list_u64("p_values")?;
    let qs = p.list_f64("q_values")?;
    let j = p.u32("j")?;
    let poly = IntPolynomial::monomial(p.u64("degree")? as usize)?;
    let restarts = p.u64("restarts")? as usize;
    let ycols: Vec<String> = qs.iter().map(|q| format!("q={}", num_label(*q))).collect();
    let mut t = ResultTable::new(cols(&["p"], ycols.clone()));
    for (ip, &pr) in ps.iter().enumerate() {
        let mut row = vec![Cell::Num(pr as f64)];
        for (iq, &q) in qs.iter().enumerate() {
            let seed = derive_seed(ctx.seed, ctx.name, (ip * qs.len() + iq) as u64);
            let s = bilinear_norm_search(pr, j, q, &poly, restarts, seed).map_err(tag("p_values"))?;
            row.push(Cell::Num(s.bound));
        }
        t.push(row)?;
    }
    Ok((t, plot("p", &ycols, false, false)))
}

fn single_scale_decay(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let ks = p.list_u64("log2_n_values")?;
    let c0 = p.u32("c0")?;
    let deg = p.u64("degree")? as u32;
    let poly = IntPolynomial::monomial(deg as usize)?;
    if ks.iter().any(|&k| k > 30) {
        return Err(MlabError::scale("log2_n_values", "log₂ N above 30"));
    }
    let nmax = 1u64 << ks.iter().copied().max().unwrap_or(1);
    let sieve = sieve_for(nmax, "log2_n_values")?;
    let mut t = ResultTable::new(cols(&["N", "ratio"], []));
    for (i, &k) in ks.iter().enumerate() {
        let n = 1u64 << k;
        let len = n.checked_pow(deg).filter(|&l| l <= crate::tolerances::DENSE_LEN_MAX).ok_or_else(|| {
            MlabError::scale("log2_n_values", format!("window N^{deg} at N = {n} exceeds {}", crate::tolerances::DENSE_LEN_MAX))
        })?;
        let lam = sieve.mangoldt_values(n)?;
        let approx = MangoldtApproximant::new(n as f64, c0, &sieve)?;
        let signs = |draw: u64| -> Vec<f64> {
            let mut r = derive_rng(ctx.seed, ctx.name, draw);
            (0..len).map(|_| if r.gen::<bool>() { 1.0 } else { -1.0 }).collect()
        };
        let f = WindowedSeries::from_real(1, &signs(2 * i as u64))?;
        let g = WindowedSeries::from_real(1, &signs(2 * i as u64 + 1))?;
        let a = avg_upper(n, |m| lam[m as usize] - approx.eval(m as i64), &f, &g, &poly).map_err(tag("log2_n_values"))?;
        t.push(vec![(n as f64).into(), (a.l1_norm() / (f.l2_norm() * g.l2_norm())).into()])?;
    }
    Ok((t, plot("N", &["ratio".into()], true, true)))
}

fn prime_weyl(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let ns = p.list_u64("n_values")?;
    let alpha = p.f64("alpha")?;
    let poly = IntPolynomial::monomial(p.u64("degree")? as usize)?;
    let top = *ns.iter().max().unwrap_or(&1);
    if top > crate::tolerances::EXP_SUM_N_MAX {
        return Err(MlabError::scale("n_values", format!("{top} exceeds {}", crate::tolerances::EXP_SUM_N_MAX)));
    }
    let sieve = sieve_for(top, "n_values")?;
    let mut t = ResultTable::new(cols(&["N", "abs", "re", "im"], []));
    for &n in &ns {
        let s = weyl_sum_primes(n, alpha, &poly, &sieve).map_err(tag("n_values"))?;
        t.push(vec![(n as f64).into(), s.norm().into(), s.re.into(), s.im.into()])?;
    }
    Ok((t, plot("N", &["abs".into()], true, true)))
}

fn improving_sweep(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let ns = p.list_u64("n_values")?;
    let c0 = p.u32("c0")?;
    let deg = p.u64("degree")? as u32;
    let poly = IntPolynomial::monomial(deg as usize)?;
    let exponent = p.f64("p")?;
    let sieve = sieve_for(*ns.iter().max().unwrap_or(&1), "n_values")?;
    let mut t = ResultTable::new(cols(&["N", "ratio"], []));
    for &n in &ns {
        let len = n.checked_pow(deg).ok_or_else(|| MlabError::scale("n_values", format!("N^{deg} overflows at N = {n}")))?;
        let r = if exponent == 2.0 {
            improving_ratio_interval_l2(n, &poly, len, c0, &sieve)
        } else {
            if len > crate::tolerances::DENSE_LEN_MAX {
                return Err(MlabError::scale("n_values", format!("dense window N^{deg} = {len} for p ≠ 2")));
            }
            let f = WindowedSeries::ones(1, len as usize)?;
            improving_ratio(n, &poly, &f, exponent, c0, &sieve)
        }
        .map_err(tag("n_values"))?;
        t.push(vec![(n as f64).into(), r.into()])?;
    }
    Ok((t, plot("N", &["ratio".into()], true, false)))
}

fn linear_equations(ctx: &Context) -> Result<(ResultTable, PlotSpec)> {
    let p = &ctx.params;
    let system = p.text("system")?;
    let n = p.u64("n")? as i64;
    let zs = p.list_f64("z_values")?;
    if n < 1 {
        return Err(MlabError::Config("parameter `n`: box side must be positive".into()));
    }
    let (forms, dim) = match system.as_str() {
        "twin" => (vec![AffineForm::new(vec![1], 0), AffineForm::new(vec![1], 2)], 1),
        "ap3" => ((0..3).map(|k| AffineForm::new(vec![1, k], 0)).collect(), 2),
        "ap4" => ((0..4).map(|k| AffineForm::new(vec![1, k], 0)).collect(), 2),
        other => return Err(MlabError::Config(format!("parameter `system`: unknown pattern `{other}` (twin, ap3, ap4)"))),
    };
    let omega = IntegerBox::new(vec![1; dim], vec![n; dim])?;
    let top = zs.iter().cloned().fold(2.0, f64::max);
    let sieve = sieve_for(top.ceil() as u64, "z_values")?;
    let mut t = ResultTable::new(cols(&["z", "count", "prediction", "ratio"], []));
    for &z in &zs {
        let zl = vec![z; forms.len()];
        let (lhs, pred) = cramer_linear_count(&forms, &omega, &zl, &sieve).map_err(tag("n"))?;
        t.push(vec![z.into(), lhs.into(), pred.into(), (lhs / pred).into()])?;
    }
    Ok((t, plot("z", &["ratio".into()], false, false)))
}
