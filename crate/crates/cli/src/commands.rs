use std::fs;
use std::path::Path;

use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::{json, Value};

use surfqp::ainfty::{build_category, euler_form, kernel_rank, verify_ainfty};
use surfqp::floer::{
    assemble_floer_potential, boundary_walk_violations, compare_with_quiver, graded_hom_table, homology_check,
    maslov_gradings, Background, FloerError, WkbAlgebraSpec,
};
use surfqp::ginzburg::{check_d_squared, jacobian_dims};
use surfqp::quiver::{mutate_qp, qp_from_triangulation, reduce_qp, QuiverError, QuiverWithPotential};
use surfqp::surface::{IdealTriangulation, MarkedSurface, RankInput, Signing, SurfaceError};
use surfqp::wkb::{
    cellulation_obstruction, classify_points, detect_saddle_connections, plot_data, separatrices, svg_plot,
    trace_trajectory, wkb_triangulation, QuadraticDifferential, TraceParams, WkbError,
};

use crate::{
    AinftyCmd, BackgroundArg, Cli, Command, FloerCmd, FloerOpts, Format, GinzburgCmd, PipelineArgs, PlotFormat, QpCmd,
    SurfaceCmd, TraceOpts, WkbCmd, SCHEMA_VERSION,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

/// Failure with its exit code and an optional JSON body.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
    pub details: Option<Value>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into(), details: None }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INVALID, message: message.into(), details: None }
    }
}

impl From<SurfaceError> for Failure {
    fn from(e: SurfaceError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<QuiverError> for Failure {
    fn from(e: QuiverError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<FloerError> for Failure {
    fn from(e: FloerError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<WkbError> for Failure {
    fn from(e: WkbError) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INVALID };
        let details = match &e {
            WkbError::NoTrivalentCellulation { genus, zeros, edges, euler, faces } => Some(json!({
                "genus": genus, "zeros": zeros, "edges": edges, "euler_characteristic": euler, "faces": faces,
            })),
            _ => None,
        };
        Failure { code, message: e.to_string(), details }
    }
}

/// What a command produced: a document and the exit code to report with it.
pub enum Output {
    Json(Value, u8),
    Text(String),
}

pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Surface(c) => surface(c),
        Command::Qp(c) => qp(c),
        Command::Ginzburg(c) => ginzburg(c),
        Command::Ainfty(c) => ainfty(c),
        Command::Wkb(c) => wkb(c),
        Command::Floer(c) => floer(c),
        Command::Pipeline(a) => pipeline(a),
    };
    match result {
        Ok(Output::Json(v, code)) => match emit(&render(v), cli.out.as_deref()) {
            Ok(()) => code,
            Err(f) => report_failure(f),
        },
        Ok(Output::Text(s)) => match emit(&s, cli.out.as_deref()) {
            Ok(()) => EXIT_OK,
            Err(f) => report_failure(f),
        },
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> u8 {
    let mut body = json!({ "error": f.message, "exit_code": f.code });
    if let Some(d) = f.details {
        body["details"] = d;
    }
    eprint!("{}", render(body));
    f.code
}

/// Pretty JSON with the schema version; object keys come out sorted.
pub fn render(mut v: Value) -> String {
    if let Value::Object(m) = &mut v {
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn emit(s: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, s).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{} is not valid JSON: {e}", path.display())))
}

/// A triangulation document, bare or as the `triangulation` field of an
/// earlier output.
fn read_triangulation(path: &Path) -> Result<IdealTriangulation, Failure> {
    let v = read_json(path)?;
    let v = v.get("triangulation").cloned().unwrap_or(v);
    Ok(IdealTriangulation::from_json(&v)?)
}

fn read_qp(path: &Path, order: Option<usize>) -> Result<QuiverWithPotential, Failure> {
    let qp = QuiverWithPotential::from_json(&read_json(path)?)?;
    Ok(match order {
        Some(n) => qp.with_order(n),
        None => qp,
    })
}

fn check_order(order: usize) -> Result<(), Failure> {
    if order < 3 {
        return Err(Failure::usage("truncation order must be at least 3"));
    }
    Ok(())
}

fn signing_for(surface: &MarkedSurface, given: Option<Vec<i8>>) -> Result<Signing, Failure> {
    let s = match given {
        Some(v) => Signing(v),
        None => Signing::all_positive(surface),
    };
    s.validate(surface)?;
    Ok(s)
}

fn surface(cmd: SurfaceCmd) -> Result<Output, Failure> {
    match cmd {
        SurfaceCmd::Validate { surface, format } => {
            let t = read_triangulation(&surface)?;
            let report = t.validate();
            if format == Format::Dot {
                return Ok(Output::Text(t.dual_cellulation()?.to_dot()));
            }
            let code = if report.valid() { EXIT_OK } else { EXIT_INVALID };
            Ok(Output::Json(
                json!({
                    "valid": report.valid(),
                    "report": report,
                    "admissibility": t.glfs_admissibility(),
                    "rank_formula": surfqp::surface::rank_formula(&RankInput::Surface(t.surface.clone())),
                }),
                code,
            ))
        }
        SurfaceCmd::Flip { surface, edges, canonical } => {
            let mut t = read_triangulation(&surface)?;
            for e in edges {
                t = t.flip(e)?;
            }
            if canonical {
                t = t.canonicalize();
            }
            Ok(Output::Json(json!({ "triangulation": t.to_json() }), EXIT_OK))
        }
        SurfaceCmd::Random { genus, punctures, boundary, flips, seed } => {
            let s = MarkedSurface { genus, punctures, boundary };
            let start = IdealTriangulation::standard(&s)?;
            let (t, path) = start.random_flips(flips, seed);
            Ok(Output::Json(json!({ "triangulation": t.to_json(), "flips": path, "seed": seed }), EXIT_OK))
        }
    }
}

fn qp(cmd: QpCmd) -> Result<Output, Failure> {
    match cmd {
        QpCmd::Build { surface, signing, order, format } => {
            let t = read_triangulation(&surface)?;
            let eps = signing_for(&t.surface, signing)?;
            let mut sq = qp_from_triangulation(&t, &eps)?;
            if let Some(n) = order {
                check_order(n)?;
                sq.qp = sq.qp.with_order(n.max(sq.qp.order()));
            }
            if format == Format::Dot {
                return Ok(Output::Text(sq.qp.quiver.to_dot()));
            }
            let mut v = sq.qp.to_json();
            v["vertex_edge"] = json!(sq.vertex_edge);
            v["face_words"] = json!(sq.face_words);
            v["puncture_words"] = json!(sq.puncture_words);
            v["signing"] = json!(eps.0);
            Ok(Output::Json(v, EXIT_OK))
        }
        QpCmd::Mutate { qp, vertex, order } => {
            if let Some(n) = order {
                check_order(n)?;
            }
            let input = read_qp(&qp, order)?;
            let out = mutate_qp(&input, vertex)?;
            Ok(Output::Json(out.to_json(), EXIT_OK))
        }
        QpCmd::Jacobian { qp, order } => {
            let input = read_qp(&qp, None)?;
            Ok(Output::Json(jacobian_dims(&input, order).to_json(), EXIT_OK))
        }
    }
}

fn ginzburg(cmd: GinzburgCmd) -> Result<Output, Failure> {
    match cmd {
        GinzburgCmd::Dims { qp, order } => {
            let input = read_qp(&qp, None)?;
            Ok(Output::Json(jacobian_dims(&input, order).to_json(), EXIT_OK))
        }
    }
}

fn ainfty(cmd: AinftyCmd) -> Result<Output, Failure> {
    match cmd {
        AinftyCmd::Verify { qp, nmax } => {
            let input = read_qp(&qp, None)?;
            let c = build_category(&input).map_err(|e| Failure::invalid(e.to_string()))?;
            let report = verify_ainfty(&c, nmax);
            let code = if report.pass() { EXIT_OK } else { EXIT_INVALID };
            Ok(Output::Json(json!({ "pass": report.pass(), "report": report }), code))
        }
        AinftyCmd::Euler { qp } => {
            let input = read_qp(&qp, None)?;
            let b = euler_form(&input.quiver);
            let k = kernel_rank(&b);
            Ok(Output::Json(json!({ "euler_form": b, "kernel_rank": k }), EXIT_OK))
        }
        AinftyCmd::Constants { qp } => {
            let input = read_qp(&qp, None)?;
            let c = build_category(&input).map_err(|e| Failure::invalid(e.to_string()))?;
            Ok(Output::Json(c.structure_constants_json(), EXIT_OK))
        }
    }
}

fn read_differential(path: &Path) -> Result<QuadraticDifferential, Failure> {
    let v = read_json(path)?;
    if let Some(orders) = v.get("pole_orders") {
        let orders: Vec<u32> =
            serde_json::from_value(orders.clone()).map_err(|e| Failure::usage(format!("bad pole_orders: {e}")))?;
        let genus = v.get("genus").and_then(Value::as_u64).unwrap_or(0) as u32;
        cellulation_obstruction(genus, &orders)?;
        return Err(Failure::invalid(format!(
            "pole data for genus {genus} with orders {orders:?} has no rational differential attached; supply P and Q"
        )));
    }
    Ok(QuadraticDifferential::from_json(&v)?)
}

fn params(opts: &TraceOpts) -> Result<TraceParams, Failure> {
    if !(opts.tol > 0.0) {
        return Err(Failure::usage("tolerance must be positive"));
    }
    let p = TraceParams { capture: opts.capture, ..TraceParams::default().with_tol(opts.tol) };
    p.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(p)
}

fn parse_point(s: &str) -> Result<Complex64, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| Failure::usage(format!("bad coordinate {x:?}")));
    match parts[..] {
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        _ => Err(Failure::usage("a point is written re,im")),
    }
}

fn wall_report(phi: &QuadraticDifferential, opts: &TraceOpts, p: TraceParams, e: WkbError) -> Failure {
    let mut f = Failure::from(e);
    if let Ok(conns) = detect_saddle_connections(phi, opts.theta, p) {
        if !conns.is_empty() {
            f.details = Some(json!({ "theta": opts.theta, "saddle_connections": conns }));
        }
    }
    f
}

fn wkb(cmd: WkbCmd) -> Result<Output, Failure> {
    match cmd {
        WkbCmd::Classify { differential, tol } => {
            if !(tol > 0.0) {
                return Err(Failure::usage("tolerance must be positive"));
            }
            let phi = read_differential(&differential)?;
            let cls = classify_points(&phi, tol)?;
            Ok(Output::Json(
                json!({
                    "classification": cls,
                    "pole_orders": cls.pole_orders(),
                    "divisor_degree": cls.divisor_degree(),
                }),
                EXIT_OK,
            ))
        }
        WkbCmd::Trace { differential, start, opts } => {
            let phi = read_differential(&differential)?;
            let p = params(&opts)?;
            let z0 = parse_point(&start)?;
            let t = trace_trajectory(&phi, z0, opts.theta, p)?;
            Ok(Output::Json(json!({ "trajectory": t }), EXIT_OK))
        }
        WkbCmd::Triangulate { differential, opts } => {
            let phi = read_differential(&differential)?;
            let p = params(&opts)?;
            let r = wkb_triangulation(&phi, opts.theta, p).map_err(|e| wall_report(&phi, &opts, p, e))?;
            Ok(Output::Json(r.to_json(), EXIT_OK))
        }
        WkbCmd::Plot { differential, opts, format, radius } => {
            let phi = read_differential(&differential)?;
            let p = params(&opts)?;
            let cls = classify_points(&phi, p.root_tol)?;
            let seps = separatrices(&phi, opts.theta, p)?;
            let trajs: Vec<_> = seps.iter().map(|s| &s.trajectory).collect();
            match format {
                PlotFormat::Svg => Ok(Output::Text(svg_plot(&cls, &trajs, radius))),
                PlotFormat::Json => Ok(Output::Json(plot_data(&cls, &trajs), EXIT_OK)),
            }
        }
    }
}

fn read_areas(path: Option<&Path>, punctures: usize) -> Result<Vec<BigRational>, Failure> {
    let Some(path) = path else {
        return Ok(vec![BigRational::from_integer(1.into()); punctures]);
    };
    let v = read_json(path)?;
    let list = v.as_array().ok_or_else(|| Failure::usage("areas must be a JSON list"))?;
    list.iter()
        .map(|x| match x {
            Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(n.as_i64().unwrap().into())),
            Value::String(s) => s.parse::<BigRational>().map_err(|_| Failure::usage(format!("bad area {s:?}"))),
            other => Err(Failure::usage(format!("areas are integers or \"p/q\" strings, got {other}"))),
        })
        .collect()
}

fn background(b: BackgroundArg) -> Background {
    match b {
        BackgroundArg::B0 => Background::B0,
        BackgroundArg::None => Background::None,
    }
}

fn floer(cmd: FloerCmd) -> Result<Output, Failure> {
    let (opts, compare) = match cmd {
        FloerCmd::Assemble(o) => (o, false),
        FloerCmd::Compare(o) => (o, true),
    };
    let FloerOpts { cellulation, background: b, areas, signing } = opts;
    let t = read_triangulation(&cellulation)?;
    let dual = t.dual_cellulation()?;
    let spec = WkbAlgebraSpec {
        areas: read_areas(areas.as_deref(), t.surface.punctures as usize)?,
        signing: signing_for(&t.surface, signing)?,
        background: background(b),
        cellulation: dual.clone(),
    };
    let f = assemble_floer_potential(&spec)?;
    if !compare {
        let mut v = f.to_json();
        v["graded_hom"] = graded_hom_table(&dual)?.to_json();
        v["gradings"] = json!(maslov_gradings(&dual));
        return Ok(Output::Json(v, EXIT_OK));
    }
    let cmp = compare_with_quiver(&f, &dual, &spec.signing)?;
    let walks = boundary_walk_violations(&f, &dual);
    let table_ok = graded_hom_table(&dual)?.matches_quiver(&f.qp.quiver);
    let homology = homology_check(&RankInput::Surface(t.surface.clone()), &f.qp);
    let pass = cmp.pass && walks.is_empty() && table_ok && homology.pass;
    Ok(Output::Json(
        json!({
            "pass": pass,
            "comparison": cmp,
            "boundary_walk_violations": walks,
            "graded_hom_matches": table_ok,
            "homology": homology,
        }),
        if pass { EXIT_OK } else { EXIT_INVALID },
    ))
}

fn pipeline(a: PipelineArgs) -> Result<Output, Failure> {
    check_order(a.order)?;
    let phi = read_differential(&a.differential)?;
    let p = params(&a.opts)?;
    let w = wkb_triangulation(&phi, a.opts.theta, p).map_err(|e| wall_report(&phi, &a.opts, p, e))?;
    if !w.non_degenerate {
        return Err(Failure {
            code: EXIT_INVALID,
            message: "the WKB triangulation has self-folded triangles; no quiver with potential is assigned to it"
                .into(),
            details: Some(w.to_json()),
        });
    }
    let t = &w.triangulation;
    let sq = qp_from_triangulation(t, &w.signing)?;
    let qp = sq.qp.with_order(a.order.max(sq.qp.order()));
    let reduction = reduce_qp(&qp)?;
    let d2 = check_d_squared(&reduction.reduced, 200, 8, a.seed);
    let homology = homology_check(&RankInput::PoleOrders { genus: 0, orders: w.classification.pole_orders() }, &qp);
    let mut out = json!({
        "wkb": w.to_json(),
        "qp": qp.to_json(),
        "reduced": reduction.reduced.to_json(),
        "cancelled_arrows": reduction.cancelled,
        "d_squared": d2,
        "homology": homology,
    });
    if let Some(dual) = &w.dual {
        let spec = WkbAlgebraSpec {
            areas: read_areas(a.areas.as_deref(), t.surface.punctures as usize)?,
            signing: w.signing.clone(),
            background: background(a.background),
            cellulation: dual.clone(),
        };
        let f = assemble_floer_potential(&spec)?;
        out["floer"] = f.to_json();
        if spec.background == Background::B0 {
            out["comparison"] = json!(compare_with_quiver(&f, dual, &w.signing)?);
        }
    }
    let ok = d2.pass() && homology.pass;
    Ok(Output::Json(out, if ok { EXIT_OK } else { EXIT_INVALID }))
}
