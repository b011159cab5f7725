use std::path::Path;

use anyhow::{Context, Result};
use bcr::diagram_core::{validate, DiagramJson};
use bcr::face_calculus::{faces, half_edge_dims, involution_census, Face};
use bcr::gauss_eval::DirectionFamily;
use bcr::knot_model::{builtin, connected_sum, KnotError, KnotSpec, BUILTIN_NAMES};
use bcr::zk_engine::{zk_count, zk_mc, CountOptions, McOptions, Propagators, ZkReport};
use bcr::{enumerate, enumerate_numbered, BcrDiagram};
use serde_json::{json, Value};

use crate::config::Config;
use crate::{
    Cli, Command, CountArgs, Density, EnumerateArgs, FacesArgs, Failed, Format, IntegrateArgs, KnotCommand,
    PairingsArgs, UsageError, ValidateArgs,
};

const DEFAULT_N: usize = 3;

struct Ctx {
    config: Config,
    threads: Option<usize>,
}

pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => config.get("threads")?,
    };
    if threads == Some(0) {
        return Err(UsageError("--threads must be positive".into()).into());
    }
    let ctx = Ctx { config, threads };
    match cli.command {
        Command::Enumerate(a) => cmd_enumerate(&ctx, a),
        Command::Validate(a) => cmd_validate(&ctx, a),
        Command::Faces(a) => cmd_faces(&ctx, a),
        Command::Pairings(a) => cmd_pairings(&ctx, a),
        Command::Knot(a) => cmd_knot(&ctx, a),
        Command::Integrate(a) => cmd_integrate(&ctx, a),
        Command::Count(a) => cmd_count(&ctx, a),
        Command::Selftest(a) => {
            let seed = ctx.config.pick(a.seed, "seed", 1)?;
            crate::selftest::run(seed, ctx.threads)
        }
    }
}

fn emit(ctx: &Ctx, out: Option<&Path>, text: &str) -> Result<()> {
    let out = match out {
        Some(p) => Some(p.to_path_buf()),
        None => ctx.config.get::<String>("out")?.map(Into::into),
    };
    match out {
        Some(p) => {
            let mut body = text.to_string();
            if !body.ends_with('\n') {
                body.push('\n');
            }
            std::fs::write(&p, body).with_context(|| format!("cannot write {}", p.display()))?;
            log::info!("wrote {}", p.display());
        }
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{}", text.trim_end()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON value serialises")
}

fn format_of(ctx: &Ctx, flag: Option<Format>) -> Result<Format> {
    Ok(ctx.config.pick(flag, "format", Format::Json)?)
}

/// Builtin name or path to a knot file.
fn load_knot(spec: &str, n: Option<usize>) -> Result<KnotSpec> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let knot = KnotSpec::parse(&text).with_context(|| format!("knot file {}", path.display()))?;
        if let Some(n) = n {
            if n != knot.n() {
                anyhow::bail!("knot file {} has n = {}, but --n {n} was given", path.display(), knot.n());
            }
        }
        return Ok(knot);
    }
    match builtin(spec, n.unwrap_or(DEFAULT_N)) {
        Err(KnotError::UnknownBuiltin(_)) => {
            anyhow::bail!("{spec:?} is neither a knot file nor a builtin knot ({})", BUILTIN_NAMES.join(", "))
        }
        other => Ok(other?),
    }
}

fn knot_arg(ctx: &Ctx, flag: Option<String>) -> Result<String> {
    match flag.or(ctx.config.get("knot")?) {
        Some(k) => Ok(k),
        None => Err(UsageError("--knot is required".into()).into()),
    }
}

fn diagram_fields(d: &BcrDiagram, json_form: DiagramJson) -> Value {
    let mut v = serde_json::to_value(json_form).expect("diagram serialises");
    let parity = d.parity_data();
    let m = v.as_object_mut().expect("object");
    m.insert("legs".into(), json!(d.cycle_and_legs().legs.len()));
    m.insert("epsilon".into(), json!(d.sign_epsilon()));
    m.insert("cycle_length".into(), json!(parity.l));
    m.insert("runs".into(), json!(parity.r));
    v
}

/// `"0->2 1~>3 …"`, the edge part of a diagram's display form.
fn edge_text(d: &BcrDiagram) -> String {
    let s = d.to_string();
    s.split_once(": ").map_or(s.clone(), |(_, e)| e.to_string())
}

fn cmd_enumerate(ctx: &Ctx, a: EnumerateArgs) -> Result<()> {
    let k = ctx.config.pick(a.degree, "degree", 2)?;
    let n = ctx.config.pick(a.n, "n", DEFAULT_N)?;
    let numbered = ctx.config.switch(a.numbered, "numbered")?;
    let format = format_of(ctx, a.output.format)?;
    let text = if numbered {
        let all = enumerate_numbered(k)?;
        log::info!("degree {k}: {} numbered diagrams", all.len());
        match format {
            Format::Json => {
                let items: Vec<Value> = all
                    .iter()
                    .map(|nd| {
                        let mut v = diagram_fields(nd.diagram(), DiagramJson::from_numbered(nd));
                        v["orientation_sign"] = json!(nd.orientation_sign(n));
                        v
                    })
                    .collect();
                pretty(&Value::Array(items))
            }
            Format::Csv => {
                let mut s = String::from("index,vertex_kinds,edges,numbering,legs,epsilon,orientation_sign\n");
                for (i, nd) in all.iter().enumerate() {
                    let d = nd.diagram();
                    let num: Vec<String> = nd.numbering().iter().map(|x| x.to_string()).collect();
                    s += &format!(
                        "{i},{},{},{},{},{},{}\n",
                        d.kinds().iter().map(|k| k.code()).collect::<String>(),
                        edge_text(d),
                        num.join(" "),
                        d.cycle_and_legs().legs.len(),
                        d.sign_epsilon(),
                        nd.orientation_sign(n)
                    );
                }
                s
            }
        }
    } else {
        let all = enumerate(k)?;
        log::info!("degree {k}: {} diagrams", all.len());
        match format {
            Format::Json => pretty(&Value::Array(
                all.iter().map(|d| diagram_fields(d, DiagramJson::from_diagram(d))).collect(),
            )),
            Format::Csv => {
                let mut s = String::from("index,vertex_kinds,edges,legs,epsilon,cycle_length,runs\n");
                for (i, d) in all.iter().enumerate() {
                    let p = d.parity_data();
                    s += &format!(
                        "{i},{},{},{},{},{},{}\n",
                        d.kinds().iter().map(|k| k.code()).collect::<String>(),
                        edge_text(d),
                        d.cycle_and_legs().legs.len(),
                        d.sign_epsilon(),
                        p.l,
                        p.r
                    );
                }
                s
            }
        }
    };
    emit(ctx, a.output.out.as_deref(), &text)
}

fn cmd_validate(ctx: &Ctx, a: ValidateArgs) -> Result<()> {
    let n = ctx.config.pick(a.n, "n", DEFAULT_N)?;
    let text = std::fs::read_to_string(&a.file).with_context(|| format!("cannot read {}", a.file.display()))?;
    let items = DiagramJson::parse_many(&text)?;
    let mut invalid = 0;
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let entry = match item.raw() {
            Err(e) => json!({ "index": i, "valid": false, "violations": [e.to_string()] }),
            Ok(raw) => {
                let report = validate(&raw);
                if report.is_ok() {
                    let d = BcrDiagram::from_raw(&raw).expect("validated");
                    let mut v = json!({
                        "index": i,
                        "valid": true,
                        "violations": [],
                        "degree": d.degree(),
                        "diagram": d.to_string(),
                        "epsilon": d.sign_epsilon(),
                        "dimension": half_edge_dims(&d, n).total,
                        "n": n,
                    });
                    if let Some(num) = &item.numbering {
                        match item.numbered() {
                            Ok(nd) => v["orientation_sign"] = json!(nd.orientation_sign(n)),
                            Err(e) => {
                                v["valid"] = json!(false);
                                v["violations"] = json!([format!("numbering {num:?}: {e}")]);
                            }
                        }
                    }
                    v
                } else {
                    let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
                    json!({ "index": i, "valid": false, "violations": msgs })
                }
            }
        };
        if entry["valid"] == json!(false) {
            invalid += 1;
        }
        out.push(entry);
    }
    emit(ctx, a.out.as_deref(), &pretty(&Value::Array(out)))?;
    if invalid > 0 {
        return Err(Failed(format!("{invalid} of {} diagrams are invalid", items.len())).into());
    }
    Ok(())
}

fn face_json(f: &Face) -> Value {
    json!({ "vertices": f.members(), "star": f.star, "kind": f.kind })
}

fn cmd_faces(ctx: &Ctx, a: FacesArgs) -> Result<()> {
    let diagrams: Vec<BcrDiagram> = match &a.diagram {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            DiagramJson::parse_many(&text)?.iter().map(|j| j.diagram()).collect::<Result<_, _>>()?
        }
        None => enumerate(ctx.config.pick(a.degree, "degree", 2)?)?,
    };
    let text = match format_of(ctx, a.output.format)? {
        Format::Json => {
            let items: Vec<Value> = diagrams
                .iter()
                .map(|d| {
                    let (all, counts) = faces(d);
                    let mut v = json!({ "diagram": d.to_string(), "counts": counts, "total": counts.total() });
                    if a.list {
                        v["faces"] = Value::Array(all.iter().map(face_json).collect());
                    }
                    v
                })
                .collect();
            pretty(&Value::Array(items))
        }
        Format::Csv => {
            let mut s = String::from("diagram,infinite,anomalous,principal,hidden,total\n");
            for d in &diagrams {
                let (_, c) = faces(d);
                s += &format!("{d},{},{},{},{},{}\n", c.infinite, c.anomalous, c.principal, c.hidden, c.total());
            }
            s
        }
    };
    emit(ctx, a.output.out.as_deref(), &text)
}

fn cmd_pairings(ctx: &Ctx, a: PairingsArgs) -> Result<()> {
    let k = ctx.config.pick(a.degree, "degree", 2)?;
    let sphere = ctx.config.switch(a.sphere_factorization, "sphere_factorization")?;
    let census = involution_census(k, sphere)?;
    let mut v = serde_json::to_value(&census)?;
    v["ok"] = json!(census.ok());
    emit(ctx, a.out.as_deref(), &pretty(&v))?;
    if !census.ok() {
        return Err(Failed(format!("involution census for degree {k} has failures")).into());
    }
    Ok(())
}

fn cmd_knot(ctx: &Ctx, cmd: KnotCommand) -> Result<()> {
    match cmd {
        KnotCommand::Validate { knot, n, out } => {
            let n = match n {
                Some(n) => Some(n),
                None => ctx.config.get("n")?,
            };
            let k = load_knot(&knot, n)?;
            let r = k.report();
            for w in &r.warnings {
                log::warn!("{}: {w}", k.name());
            }
            let v = json!({
                "name": k.name(),
                "n": k.n(),
                "coords": k.coords().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "trivial": k.is_trivial(),
                "boundary_points": r.boundary_points,
                "max_boundary_deviation": r.max_boundary_deviation,
                "interior_points": r.interior_points,
                "warnings": r.warnings,
            });
            emit(ctx, out.as_deref(), &pretty(&v))
        }
        KnotCommand::Sum { a, b, n, out } => {
            let n = match n {
                Some(n) => Some(n),
                None => ctx.config.get("n")?,
            };
            let (ka, kb) = (load_knot(&a, n)?, load_knot(&b, n)?);
            let sum = connected_sum(&ka, &kb)?;
            emit(ctx, out.as_deref(), &sum.to_text())
        }
    }
}

fn render(ctx: &Ctx, report: &ZkReport, extra: Value, output: &crate::Output) -> Result<()> {
    let text = match format_of(ctx, output.format)? {
        Format::Json => {
            let mut v = serde_json::to_value(report)?;
            if let (Some(m), Value::Object(e)) = (v.as_object_mut(), extra) {
                m.extend(e);
            }
            pretty(&v)
        }
        Format::Csv => report.to_csv(),
    };
    emit(ctx, output.out.as_deref(), &text)
}

fn cmd_integrate(ctx: &Ctx, a: IntegrateArgs) -> Result<()> {
    let c = &ctx.config;
    let k = c.pick(a.degree, "degree", 2)?;
    let n = match a.n {
        Some(n) => Some(n),
        None => c.get("n")?,
    };
    let knot = load_knot(&knot_arg(ctx, a.knot)?, n)?;
    let samples = c.pick(a.samples, "samples", 100_000)?;
    let seed = c.pick(a.seed, "seed", 0)?;
    let density = c.pick(a.density, "density", Density::Round)?;
    let radius = c.pick(a.radius, "radius", 0.3)?;
    let dir_seed = c.pick(a.dir_seed, "dir_seed", seed)?;
    let pairing = c.switch(a.pairing, "pairing")?;
    if samples == 0 {
        return Err(UsageError("--samples must be positive".into()).into());
    }
    let props = match density {
        Density::Round => Propagators::<f64>::round(k.max(1), knot.n()),
        Density::Bump => {
            if !(radius > 0.0 && radius <= 1.0) {
                return Err(UsageError(format!("--radius must lie in (0, 1], got {radius}")).into());
            }
            Propagators::bump(&DirectionFamily::sample(k.max(1), knot.n(), dir_seed), radius)
        }
    };
    let opts = McOptions { samples, seed, pairing, threads: ctx.threads };
    let report = zk_mc(k, &knot, &props, &opts)?;
    log::info!("Z_{k}({}) = {} ± {}", knot.name(), report.z_k, report.stderr);
    let extra = match density {
        Density::Round => json!({ "density": { "type": "round" } }),
        Density::Bump => json!({ "density": { "type": "bump", "radius": radius, "dir_seed": dir_seed } }),
    };
    render(ctx, &report, extra, &a.output)
}

fn cmd_count(ctx: &Ctx, a: CountArgs) -> Result<()> {
    let c = &ctx.config;
    let k = c.pick(a.degree, "degree", 2)?;
    let n = match a.n {
        Some(n) => Some(n),
        None => c.get("n")?,
    };
    let knot = load_knot(&knot_arg(ctx, a.knot)?, n)?;
    let defaults = CountOptions::default();
    let seed = c.pick(a.seed, "seed", 0)?;
    let opts = CountOptions {
        starts: c.pick(a.starts, "starts", defaults.starts)?,
        max_iter: c.pick(a.max_iter, "max_iter", defaults.max_iter)?,
        seed,
        threads: ctx.threads,
        pairing: c.switch(a.pairing, "pairing")?,
        ..defaults
    };
    if opts.starts == 0 {
        return Err(UsageError("--starts must be positive".into()).into());
    }
    let dir_seed = c.pick(a.dir_seed, "dir_seed", seed)?;
    let dirs = DirectionFamily::sample(k.max(1), knot.n(), dir_seed);
    let report = zk_count(k, &knot, &dirs, &opts)?;
    if report.complete == Some(false) {
        log::warn!("some root searches look incomplete; the count is a lower-confidence estimate");
    }
    log::info!("Z_{k}({}) = {} (scaled {:?})", knot.name(), report.z_k, report.scaled);
    render(ctx, &report, json!({ "dir_seed": dir_seed }), &a.output)
}
