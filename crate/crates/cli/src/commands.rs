use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use ringmatch::continuum::{compare_large_n, discrete_family, solve_continuum};
use ringmatch::galerkin::{continue_mu, loglog_slope, newton_refine, residual, write_branch, Branch, GalerkinGrid, GalerkinState, NewtonOptions};
use ringmatch::glradial::{find_homoclinic_with, GlOptions};
use ringmatch::linalg::{norm2, norm_inf};
use ringmatch::matching::{fixtures, write_table, MatchProblem, MatchSolver, SolveOptions};
use ringmatch::profile::{export_field, synthesize_field, PlanarGrid, ProfileContext, Regions};
use ringmatch::rdsys::{coefficients_with, parse_system, sh_system, verify_turing};
use ringmatch::{Error, Result, System};

use crate::config::{join, FileConfig, List, Meta, Source};
use crate::{RootArgs, SystemArgs};

const MAX_MATCH_N: usize = 12;

pub struct Ctx {
    file: FileConfig,
    meta: Meta,
    out: Option<PathBuf>,
    seed: Option<u64>,
}

impl Ctx {
    pub fn new(file: FileConfig, out: Option<PathBuf>, seed: Option<u64>) -> Self {
        let mut meta = Meta::default();
        meta.record("version", env!("CARGO_PKG_VERSION").into(), Source::Flag);
        Ctx { file, meta, out, seed }
    }

    fn emit(&mut self, body: &str) -> Result<()> {
        let out = self.out.clone().or(self.file.out.clone());
        write_to(out.as_deref(), body)
    }
}

fn write_to(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(body.as_bytes())?;
            so.flush()?;
            Ok(())
        }
    }
}

fn system(ctx: &mut Ctx, args: &SystemArgs) -> Result<System> {
    let path = if args.system.is_some() {
        args.system.clone()
    } else if args.sh || args.gamma.is_some() {
        None
    } else {
        ctx.file.system.clone()
    };
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            let sys = parse_system(&text).map_err(|e| match e {
                Error::Parse(m) => Error::Parse(format!("{}: {m}", p.display())),
                other => other,
            })?;
            ctx.meta.record("system", p.display().to_string(), Source::Flag);
            Ok(sys)
        }
        None => {
            let g = ctx.meta.pick("gamma", args.gamma, ctx.file.gamma, 1.6);
            let sys = sh_system(g);
            ctx.meta.record("system", sys.label.clone(), Source::Flag);
            Ok(sys)
        }
    }
}

fn vec2(v: &[f64; 2]) -> String {
    // adding 0.0 turns −0 into +0
    format!("({:.16e}, {:.16e})", v[0] + 0.0, v[1] + 0.0)
}

pub fn coeffs(ctx: &mut Ctx, sys_args: &SystemArgs) -> Result<u8> {
    let sys = system(ctx, sys_args)?;
    let td = verify_turing(&sys)?;
    let c = coefficients_with(&sys, &td);
    let sub = c.c0 > 0.0 && c.c3 < 0.0;
    let mut s = ctx.meta.header();
    let _ = writeln!(s, "kc={}", td.kc);
    let _ = writeln!(s, "U0={}\nU1={}\nU0*={}\nU1*={}", vec2(&td.u0), vec2(&td.u1), vec2(&td.u0s), vec2(&td.u1s));
    let _ = writeln!(s, "c0={:.16e}\nc3={:.16e}\nnu={:.16e}", c.c0, c.c3, c.nu);
    let _ = writeln!(s, "subcritical={}", if sub { "yes" } else { "no" });
    ctx.emit(&s)?;
    Ok(if sub { 0 } else { 3 })
}

pub fn matching(ctx: &mut Ctx, m: Option<u32>, n: Option<usize>, starts: Option<usize>, tol: Option<f64>, compare: bool) -> Result<u8> {
    let f = ctx.file.clone();
    let m = ctx.meta.pick("m", m, f.m, 2);
    let n = ctx.meta.pick("N", n, f.n, 1);
    if n > MAX_MATCH_N {
        return Err(Error::DomainError(format!("N = {n} exceeds {MAX_MATCH_N}; use the continuum command for large N")));
    }
    if m == 0 {
        return Err(Error::DomainError("m must be positive".into()));
    }
    let seed = ctx.meta.pick("seed", ctx.seed, f.seed, SolveOptions::default().seed);
    let tol = ctx.meta.pick("tol", tol, f.tol, SolveOptions::default().tol);
    let starts = ctx.meta.maybe("starts", starts, f.starts);
    let compare = compare || f.compare_paper.unwrap_or(false);
    let opts = SolveOptions { starts, seed, tol, ..SolveOptions::default() };
    let p = MatchProblem { m, n };
    let sols = MatchSolver::new(opts).solve(p)?;
    let listed: Vec<Vec<f64>> = sols.iter().filter(|s| s.listed()).map(|s| s.a.clone()).collect();
    ctx.emit(&(ctx.meta.header() + &write_table(p, &sols)))?;
    eprintln!("m={m} N={n}: {} listed solutions ({} roots in total)", listed.len(), sols.len());
    if !compare {
        return Ok(0);
    }
    let Some(c) = fixtures::compare(m % 2 == 1, n, &listed) else {
        return Err(Error::DomainError(format!("no published table for N = {n}")));
    };
    for row in &c.missing {
        eprintln!("missing: {}", join(row));
    }
    for row in &c.extra {
        eprintln!("unlisted: {}", join(row));
    }
    eprintln!("compare-paper: {} ({} found, {} expected)", if c.passed() { "PASS" } else { "FAIL" }, c.found, c.expected);
    Ok(if c.passed() { 0 } else { 1 })
}

pub fn gl(ctx: &mut Ctx, sys_args: &SystemArgs, c0: Option<f64>, c3: Option<f64>, s_max: Option<f64>) -> Result<u8> {
    let f = ctx.file.clone();
    let (c0, c3) = match (c0.or(f.c0), c3.or(f.c3)) {
        (Some(a), Some(b)) => {
            ctx.meta.record("c0", a.to_string(), Source::Flag);
            ctx.meta.record("c3", b.to_string(), Source::Flag);
            (a, b)
        }
        (None, None) => {
            let sys = system(ctx, sys_args)?;
            let c = coefficients_with(&sys, &verify_turing(&sys)?);
            (c.c0, c.c3)
        }
        _ => return Err(Error::DomainError("give both --c0 and --c3, or neither".into())),
    };
    let s_max = ctx.meta.maybe("s_max", s_max, f.s_max);
    let sol = find_homoclinic_with(c0, c3, &GlOptions { s_max, ..GlOptions::default() })?;
    let mut buf = ctx.meta.header().into_bytes();
    sol.write_csv(&mut buf)?;
    ctx.emit(&String::from_utf8_lossy(&buf))?;
    eprintln!("q0={:.12} q_plus={:.6} tail_slope={:.6} residual={:.2e}", sol.q0, sol.q_plus, sol.tail_slope, sol.residual());
    Ok(0)
}

fn parse_regions(s: &str) -> Result<Regions> {
    match s {
        "two-region" => Ok(Regions::TwoRegion),
        "strict" => Ok(Regions::Strict),
        "blend" => Ok(Regions::Blend),
        "composite" => Ok(Regions::Composite),
        _ => Err(Error::Parse(format!("unknown regions {s:?}; expected two-region, strict, blend or composite"))),
    }
}

/// The matching vector: explicit, or a listed root of the (m, N) problem.
fn root_vector(ctx: &mut Ctx, args: &RootArgs) -> Result<(u32, Vec<f64>)> {
    let f = ctx.file.clone();
    let m = ctx.meta.pick("m", args.m, f.m, 2);
    let explicit = if args.a.is_empty() { None } else { Some(args.a.clone()) };
    let explicit = if args.root.is_some() { None } else { explicit.or(f.a.clone()) };
    if let Some(a) = explicit {
        if let Some(n) = args.n.or(f.n) {
            if n + 1 != a.len() {
                return Err(Error::DimensionMismatch { expected: n + 1, got: a.len() });
            }
        }
        ctx.meta.record("a", join(&a), Source::Flag);
        return Ok((m, a));
    }
    let n = ctx.meta.pick("N", args.n, f.n, 1);
    let k = ctx.meta.pick("root", args.root, f.root, 0);
    let seed = ctx.meta.pick("seed", ctx.seed, f.seed, SolveOptions::default().seed);
    let sols = MatchSolver::new(SolveOptions { seed, ..SolveOptions::default() }).solve(MatchProblem { m, n })?;
    let listed: Vec<Vec<f64>> = sols.into_iter().filter(|s| s.listed()).map(|s| s.a).collect();
    let a = listed.get(k).cloned().ok_or_else(|| Error::DomainError(format!("root {k} out of range: {} listed roots", listed.len())))?;
    ctx.meta.record("a", join(&a), Source::Flag);
    Ok((m, a))
}

pub struct SynthOpts {
    pub mu: Option<f64>,
    pub sign: Option<f64>,
    pub disc: Option<f64>,
    pub square: Option<f64>,
    pub points: Option<usize>,
    pub regions: Option<String>,
    pub r0: Option<f64>,
    pub both: bool,
}

pub fn synthesize(ctx: &mut Ctx, sys_args: &SystemArgs, root: &RootArgs, o: SynthOpts) -> Result<u8> {
    let f = ctx.file.clone();
    let sys = system(ctx, sys_args)?;
    let (m, a) = root_vector(ctx, root)?;
    let mu = ctx.meta.pick("mu", o.mu, f.mu, 0.05);
    if !(mu > 0.0) {
        return Err(Error::DomainError(format!("mu must be positive, got {mu}")));
    }
    let sign = ctx.meta.pick("sign", o.sign, f.sign, 1.0);
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::DomainError(format!("sign must be +1 or -1, got {sign}")));
    }
    let regions = ctx.meta.pick("regions", o.regions.clone(), f.regions.clone(), "two-region".to_string());
    let points = ctx.meta.pick("points", o.points, f.points, 201);
    let grid = match (o.disc.or(f.disc), o.square.or(f.square)) {
        (_, Some(w)) if o.disc.is_none() => {
            ctx.meta.record("square", w.to_string(), Source::Flag);
            PlanarGrid::Square { half_width: w, points }
        }
        (d, _) => {
            let r = ctx.meta.pick("disc", d, None, 40.0);
            PlanarGrid::Disc { radius: r, points }
        }
    };
    let both = o.both || f.both.unwrap_or(false);
    let mut pc = ProfileContext::new(&sys, m, &a, mu)?;
    pc.sign = sign;
    pc.regions = parse_regions(&regions)?;
    if let Some(r0) = ctx.meta.maybe("r0", o.r0, f.r0) {
        pc.r0 = r0;
    }
    ctx.meta.record("r0_used", pc.r0.to_string(), Source::Flag);
    pc.validate()?;
    let mut field = synthesize_field(&pc, &grid, both, &sys.label)?;
    field.meta.extra.extend(ctx.meta.pairs());
    let mut buf = Vec::new();
    export_field(&field, &mut buf)?;
    ctx.emit(&String::from_utf8_lossy(&buf))?;
    let peak = field.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    eprintln!("{} points, max |<U0*, u>| = {peak:.6e}", field.points.len());
    Ok(0)
}

pub struct VerifyOpts {
    pub mus: Vec<f64>,
    pub regions: Option<String>,
    pub h: Option<f64>,
    pub r_max: Option<f64>,
    pub tol: Option<f64>,
    pub refine: Option<f64>,
    pub branch: Option<String>,
    pub table: Option<PathBuf>,
}

fn parse_branch(s: &str) -> Result<(f64, f64, usize)> {
    let err = || Error::Parse(format!("branch must be start:end:steps, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(err());
    }
    let a: f64 = parts[0].parse().map_err(|_| err())?;
    let b: f64 = parts[1].parse().map_err(|_| err())?;
    let n: usize = parts[2].parse().map_err(|_| err())?;
    Ok((a, b, n))
}

fn branch_csv(meta: &str, b: &Branch<f64>) -> Result<String> {
    let mut buf = meta.as_bytes().to_vec();
    write_branch(b, &mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

pub fn verify(ctx: &mut Ctx, sys_args: &SystemArgs, root: &RootArgs, o: VerifyOpts) -> Result<u8> {
    let f = ctx.file.clone();
    let sys = system(ctx, sys_args)?;
    let (m, a) = root_vector(ctx, root)?;
    let mus = if o.mus.is_empty() { None } else { Some(List(o.mus.clone())) };
    let mus = ctx.meta.pick("mus", mus, f.mus.clone().map(List), List(vec![0.08, 0.02])).0;
    let regions = ctx.meta.pick("regions", o.regions.clone(), f.regions.clone(), "composite".to_string());
    let h = ctx.meta.pick("h", o.h, f.h, 0.05);
    let r_max = ctx.meta.pick("r_max", o.r_max, f.r_max, 100.0);
    let tol = ctx.meta.pick("tol", o.tol, f.tol, 1e-9);
    let refine = ctx.meta.maybe("refine", o.refine, f.refine);
    let branch = ctx.meta.maybe("branch", o.branch.clone(), f.branch.clone()).map(|s| parse_branch(&s)).transpose()?;
    let table = o.table.clone().or(f.table.clone());
    if mus.is_empty() || mus.iter().chain(refine.iter()).any(|mu| !(*mu > 0.0)) {
        return Err(Error::DomainError("every mu must be positive".into()));
    }
    let grid = GalerkinGrid::new(r_max, h, m, a.len() - 1)?;
    let mut base = ProfileContext::new(&sys, m, &a, mus[0])?;
    base.regions = parse_regions(&regions)?;
    let seed_at = |mu: f64| -> Result<GalerkinState<f64>> {
        grid.check_extent(mu)?;
        GalerkinState::from_profile(&grid, &base.with_mu(mu)?)
    };
    let opts = NewtonOptions { tol, ..NewtonOptions::default() };

    let mut report = ctx.meta.header();
    let mut rows = Vec::new();
    for &mu in &mus {
        let r = residual(&sys, &grid, &seed_at(mu)?)?;
        let _ = writeln!(report, "residual mu={mu} l2={:.6e} inf={:.6e}", norm2(&r), norm_inf(&r));
        rows.push((mu, norm2(&r)));
    }
    if rows.len() > 1 {
        rows.sort_by(|x, y| x.0.total_cmp(&y.0));
        let decreasing = rows.windows(2).all(|w| w[0].1 < w[1].1);
        let _ = writeln!(report, "trend={}", if decreasing { "decreasing-with-mu" } else { "not-monotone" });
    }
    let finish = |ctx: &mut Ctx, report: &str, e: Error| -> Result<u8> {
        ctx.emit(report)?;
        Err(e)
    };
    if let Some(mu) = refine {
        match newton_refine(&sys, &grid, &seed_at(mu)?, &opts) {
            Ok((st, rep)) => {
                let k = rep.quadratic_constant().map_or("-".to_string(), |k| format!("{k:.3e}"));
                let _ = writeln!(
                    report,
                    "refine mu={mu} converged=yes iterations={} rel_correction={:.6e} residual={:.3e} quadratic_K={k}",
                    rep.iterations, rep.relative_correction, st.residual_norm
                );
                let _ = writeln!(report, "refine residuals={}", join(&rep.residual_history.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>()));
            }
            Err(e) => {
                let _ = writeln!(report, "refine mu={mu} converged=no");
                return finish(ctx, &report, e);
            }
        }
    }
    if let Some((mu_a, mu_b, steps)) = branch {
        let start = match seed_at(mu_a).and_then(|s| newton_refine(&sys, &grid, &s, &opts)) {
            Ok((st, _)) => st,
            Err(e) => {
                let _ = writeln!(report, "branch start mu={mu_a} converged=no");
                return finish(ctx, &report, e);
            }
        };
        grid.check_extent(mu_b)?;
        let b = continue_mu(&sys, &grid, &start, mu_b, steps, &opts)?;
        let slope = loglog_slope(&b.rows).unwrap_or(f64::NAN);
        let fold = b.fold_bracket.map_or("-".to_string(), |(x, y)| format!("{x}:{y}"));
        let _ = writeln!(report, "branch slope={slope:.6} fold={fold}");
        let csv = branch_csv(&format!("{}# slope={slope:.6}\n# fold={fold}\n", ctx.meta.header()), &b)?;
        match &table {
            Some(p) => write_to(Some(p), &csv)?,
            None => report.push_str(&csv),
        }
    }
    ctx.emit(&report)?;
    Ok(0)
}

pub fn continuum(ctx: &mut Ctx, grid: Option<usize>, family: Vec<usize>, table: Option<PathBuf>) -> Result<u8> {
    let f = ctx.file.clone();
    let m = ctx.meta.pick("grid", grid, f.grid, 128);
    let family = if family.is_empty() { None } else { Some(List(family)) };
    let mut family = ctx.meta.pick("family", family, f.family.clone().map(List), List(vec![20, 40, 80])).0;
    family.sort_unstable();
    family.dedup();
    let table_path = table.or(f.table.clone());
    let sol = solve_continuum(m)?;
    let fam = discrete_family(&family)?;
    let conv = compare_large_n(&fam, Some(&sol));
    let mut buf = ctx.meta.header().into_bytes();
    let _ = writeln!(buf, "# residual={:.3e} iterations={}", sol.residual_norm, sol.iterations);
    sol.write_csv(&mut buf)?;
    ctx.emit(&String::from_utf8_lossy(&buf))?;
    let mut tbuf = ctx.meta.header().into_bytes();
    conv.write_csv(&mut tbuf)?;
    let tstr = String::from_utf8_lossy(&tbuf).into_owned();
    match &table_path {
        Some(p) => write_to(Some(p), &tstr)?,
        None => eprint!("{tstr}"),
    }
    eprintln!("continuum M={m}: residual {:.3e}, alpha(0)={:.6} alpha(1)={:.6}", sol.residual_norm, sol.alpha[0], sol.alpha[m - 1]);
    Ok(0)
}
