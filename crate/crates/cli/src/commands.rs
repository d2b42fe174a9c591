use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use magbend_core::curve::{bending_radius, fit_quadratic, polyline_curvature, Curve2D, CurveSource};
use magbend_core::field::{calibrate_remanence_with_order, hz_quadrature, AxialPoint, CuboidMagnet};
use magbend_core::pipeline::sweep::resolve_spec;
use magbend_core::pipeline::*;
use magbend_core::rod::{build_rod, solve_equilibrium, RodSpec, SolverOptions};
use magbend_core::surrogate::{
    load_dataset_csv, save_dataset_csv, split_holdout, BendSample, SurrogateModel, TrainOptions,
};
use magbend_core::units::{fmt_sig9, mm_to_m, mpa_to_pa, mt_to_t, t_to_mt};
use magbend_core::Error;
use serde_json::json;

use crate::args::*;
use crate::points::{read_points_mm, write_points_mm};

/// Settings shared by every subcommand.
pub struct Ctx {
    pub quiet: bool,
    pub json: bool,
    pub out_dir: PathBuf,
}

impl Ctx {
    fn status(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn default_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// What a successful run reports back to `main`.
pub enum Outcome {
    Done,
    /// Output was written but some solves did not converge.
    NotConverged(usize),
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => stdout(text),
    }
}

/// A closed pipe downstream is not an error.
fn stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(anyhow::Error::new(e).context("writing stdout")),
        _ => Ok(()),
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    stdout(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn spec_from_arg(id: &str) -> Result<RodSpec> {
    Ok(resolve_spec(&SpecRef::Id(id.to_string()), None)?)
}

pub fn field(ctx: &Ctx, a: &FieldArgs) -> Result<Outcome> {
    let distance = mm_to_m(a.distance_mm);
    let unit = CuboidMagnet::cube(mm_to_m(a.side_mm), 1.0)?;
    let br = match (a.calibrate, a.br_t) {
        (true, _) => {
            let measured = a.measured_mt.context("--calibrate needs --measured-mT")?;
            calibrate_remanence_with_order(&unit, distance, mt_to_t(measured), a.order)?
        }
        (false, Some(br)) => br,
        (false, None) => bail!(Error::Argument("give --br-T or --calibrate".to_string())),
    };
    let magnet = unit.with_br(br);
    let value = hz_quadrature(&magnet, AxialPoint::from_pole_face(&magnet, distance), a.order)?;
    if ctx.json {
        let mut out = json!({ "h_A_per_m": value.h(), "b_mT": t_to_mt(value.b()) });
        if a.calibrate {
            out["br_T"] = json!(br);
        }
        print_json(&out)?;
    } else {
        let mut text = String::new();
        if a.calibrate {
            text += &format!("Br = {} T\n", fmt_sig9(br));
        }
        text += &format!(
            "H = {} A/m\nB = {} mT\n",
            fmt_sig9(value.h()),
            fmt_sig9(t_to_mt(value.b()))
        );
        stdout(&text)?;
    }
    Ok(Outcome::Done)
}

pub fn solve(ctx: &Ctx, a: &SolveArgs) -> Result<Outcome> {
    let spec = spec_from_arg(&a.spec)?;
    let rod = build_rod(&spec, a.resolution)?;
    let eq = solve_equilibrium(
        &rod,
        mt_to_t(a.field_mt),
        a.angle_deg.to_radians(),
        &SolverOptions::default(),
    )?;
    let curve = Curve2D::from_equilibrium(&eq);
    let coefficient = fit_quadratic(&curve).map(|f| f.a * 1e-3).unwrap_or(f64::NAN);
    let text = match a.format {
        SolveFormat::Csv => write_points_mm(&eq.centerline),
        SolveFormat::Json => {
            let centerline: Vec<[f64; 2]> = eq.centerline.iter().map(|p| [p[0] * 1e3, p[1] * 1e3]).collect();
            let doc = json!({
                "spec": spec.name,
                "field_mT": a.field_mt,
                "angle_deg": a.angle_deg,
                "segments": rod.len(),
                "converged": eq.converged,
                "iterations": eq.iterations,
                "gradient_norm": eq.gradient_norm,
                "bending_energy_J": eq.bending_energy,
                "zeeman_energy_J": eq.zeeman_energy,
                "total_energy_J": eq.total_energy(),
                "a_per_mm": coefficient,
                "radius_mm": bending_radius(&curve)? * 1e3,
                "joint_angles_rad": eq.joint_angles,
                "centerline_mm": centerline,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(a.output.as_deref(), &text)?;
    if let Some(p) = &a.output {
        ctx.status(format!("wrote {}", p.display()));
    }
    if eq.converged {
        ctx.status(format!(
            "{} at {} mT: a = {} /mm after {} iterations",
            spec.name,
            a.field_mt,
            fmt_sig9(coefficient),
            eq.iterations
        ));
        Ok(Outcome::Done)
    } else {
        Ok(Outcome::NotConverged(1))
    }
}

pub fn fit(_ctx: &Ctx, a: &FitArgs) -> Result<Outcome> {
    let pts = read_points_mm(&a.input)?;
    let base = a.base_angle_deg.to_radians();
    let curve = Curve2D::new(
        pts.iter().map(|p| [mm_to_m(p[0]), mm_to_m(p[1])]).collect(),
        CurveSource::Synthetic,
    )
    .translated_to_origin()
    .root_aligned(base);
    let doc = match a.metric {
        Metric::Quad => {
            let f = fit_quadratic(&curve)?;
            json!({
                "metric": "quad",
                "a_per_mm": f.a * 1e-3,
                "rms_residual_mm": f.rms_residual * 1e3,
                "n_points": f.n_points,
            })
        }
        Metric::Radius => json!({ "metric": "radius", "radius_mm": bending_radius(&curve)? * 1e3 }),
        Metric::Curvature => {
            let k: Vec<f64> = polyline_curvature(&curve, 0.0)?.iter().map(|v| v * 1e-3).collect();
            let max = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            json!({ "metric": "curvature", "max_abs_per_mm": max, "curvature_per_mm": k })
        }
    };
    print_json(&doc)?;
    Ok(Outcome::Done)
}

pub fn sweep(ctx: &Ctx, a: &SweepArgs) -> Result<Outcome> {
    let grid = match &a.config {
        Some(path) => SweepConfig::from_json_file(path)?.into_grid(path.parent())?,
        None => {
            let specs = if a.all_bundled {
                magbend_core::rod::all_bundled()
            } else if a.spec.is_empty() {
                bail!(Error::Config(
                    "give --config, --all-bundled or at least one --spec".to_string()
                ));
            } else {
                a.spec.iter().map(|s| spec_from_arg(s)).collect::<Result<Vec<_>>>()?
            };
            let mut grid = SweepGrid::new(specs, a.fields_mt.iter().map(|&f| mt_to_t(f)).collect());
            grid.angles = a.angles_deg.iter().map(|d| d.to_radians()).collect();
            grid.resolution = a.resolution;
            grid
        }
    };
    grid.validate()?;
    if a.dataset.is_some() && grid.angles.len() != 1 {
        bail!(Error::Config("a dataset needs a single field angle".to_string()));
    }
    let records = run_sweep(&grid)?;
    let (format, name) = match a.format {
        LibraryFormatArg::Csv => (LibraryFormat::Csv, "library.csv"),
        LibraryFormatArg::Json => (LibraryFormat::Json, "library.json"),
    };
    let path = a.output.clone().unwrap_or_else(|| ctx.default_path(name));
    write_file(&path, &write_library(&records, format)?)?;
    ctx.status(format!("wrote {} records to {}", records.len(), path.display()));

    if let Some(ds_path) = &a.dataset {
        let samples: Vec<BendSample> = records
            .iter()
            .filter(|r| r.converged)
            .map(|r| {
                let spec = grid
                    .specs
                    .iter()
                    .find(|s| s.name == r.spec_id)
                    .expect("record comes from a grid spec");
                BendSample {
                    mt: mt_to_t(r.field_mt),
                    e: spec.moduli(),
                    l: spec.lengths(),
                    cs: spec.cross_section_side,
                    a_hat: r.a_per_mm * 1e3,
                }
            })
            .collect();
        save_dataset_csv(ds_path, &samples)?;
        ctx.status(format!("wrote {} samples to {}", samples.len(), ds_path.display()));
    }

    let failed = records.iter().filter(|r| !r.converged).count();
    if ctx.json {
        print_json(&json!({ "records": records.len(), "not_converged": failed, "library": path }))?;
    }
    Ok(if failed == 0 {
        Outcome::Done
    } else {
        Outcome::NotConverged(failed)
    })
}

pub fn train(ctx: &Ctx, a: &TrainArgs) -> Result<Outcome> {
    let data = load_dataset_csv(&a.dataset)?;
    let (train, test) = split_holdout(&data, mt_to_t(a.holdout_mt))?;
    let mut model = SurrogateModel::new(a.seed);
    let opts = TrainOptions {
        learning_rate: a.lr,
        epochs: a.epochs,
        ..TrainOptions::default()
    };
    ctx.status(format!(
        "training on {} samples, testing on {}",
        train.len(),
        test.len()
    ));
    let report = model.train(&train, Some(&test), &opts)?;
    let path = a.out.clone().unwrap_or_else(|| ctx.default_path("model.json"));
    write_file(&path, model.to_json().as_bytes())?;
    let test_mse = report.test_mse.unwrap_or(f64::NAN);
    if ctx.json {
        print_json(&json!({
            "model": path,
            "epochs": report.epochs,
            "initial_loss": report.initial_loss(),
            "final_train_loss": report.final_train_loss,
            "final_train_mse": report.final_train_mse,
            "test_mse": test_mse,
        }))?;
    } else if !ctx.quiet {
        stdout(&format!(
            "initial loss {}\nfinal loss   {}\ntest MSE     {}\n",
            fmt_sig9(report.initial_loss()),
            fmt_sig9(report.final_train_loss),
            fmt_sig9(test_mse)
        ))?;
    }
    ctx.status(format!("wrote {}", path.display()));
    Ok(Outcome::Done)
}

pub fn predict(ctx: &Ctx, a: &PredictArgs) -> Result<Outcome> {
    let model = SurrogateModel::load(&a.model)?;
    let e = [mpa_to_pa(a.e_mpa[0]), mpa_to_pa(a.e_mpa[1]), mpa_to_pa(a.e_mpa[2])];
    let l = [mm_to_m(a.l_mm[0]), mm_to_m(a.l_mm[1]), mm_to_m(a.l_mm[2])];
    let a_per_mm = model.forward(mt_to_t(a.mt_mt), e, l, mm_to_m(a.cs_mm))? * 1e-3;
    if ctx.json {
        print_json(&json!({ "a_per_mm": a_per_mm }))?;
    } else {
        stdout(&format!("{}\n", fmt_sig9(a_per_mm)))?;
    }
    Ok(Outcome::Done)
}

pub fn extract(ctx: &Ctx, a: &ExtractArgs) -> Result<Outcome> {
    let img = GrayImage::load_pgm(&a.input, a.scale)?;
    let axis = match a.axis {
        AxisArg::X => ScanAxis::X,
        AxisArg::Y => ScanAxis::Y,
    };
    let curve = extract_centerline(&img, a.threshold, axis)?;
    if ctx.json && a.output.is_none() {
        let pts: Vec<[f64; 2]> = curve.points.iter().map(|p| [p[0] * 1e3, p[1] * 1e3]).collect();
        print_json(&json!({ "n_points": pts.len(), "points_mm": pts }))?;
    } else {
        emit(a.output.as_deref(), &write_points_mm(&curve.points))?;
    }
    match fit_quadratic(&curve) {
        Ok(f) => ctx.status(format!("{} points, a = {} /mm", curve.len(), fmt_sig9(f.a * 1e-3))),
        Err(_) => ctx.status(format!("{} points", curve.len())),
    }
    Ok(Outcome::Done)
}

pub fn render(ctx: &Ctx, a: &RenderArgs) -> Result<Outcome> {
    let mut curves = Vec::new();
    for item in &a.curve {
        let Some((label, path)) = item.split_once('=') else {
            bail!(Error::Argument(format!("--curve expects LABEL=PATH, got `{item}`")));
        };
        let pts = read_points_mm(Path::new(path))?;
        let curve = Curve2D::new(
            pts.iter().map(|p| [mm_to_m(p[0]), mm_to_m(p[1])]).collect(),
            CurveSource::Image,
        );
        curves.push(LabeledCurve::new(label, curve));
    }
    let mut failed = 0;
    if let Some(id) = &a.spec {
        let spec = spec_from_arg(id)?;
        let rod = build_rod(&spec, a.resolution)?;
        for &f in &a.fields_mt {
            let eq = solve_equilibrium(&rod, mt_to_t(f), a.angle_deg.to_radians(), &SolverOptions::default())?;
            if !eq.converged {
                failed += 1;
            }
            curves.push(LabeledCurve::new(
                format!("{} {} mT", spec.name, f),
                Curve2D::from_equilibrium(&eq),
            ));
        }
    }
    if curves.is_empty() {
        bail!(Error::Config(
            "nothing to render: give --curve or --spec with --fields-mT".to_string()
        ));
    }
    let style = SvgStyle {
        title: a.title.clone(),
        ..SvgStyle::default()
    };
    let svg = render_svg(&curves, &style)?;
    let path = a.output.clone().unwrap_or_else(|| ctx.default_path("curves.svg"));
    write_file(&path, svg.as_bytes())?;
    ctx.status(format!("wrote {} curves to {}", curves.len(), path.display()));
    Ok(if failed == 0 {
        Outcome::Done
    } else {
        Outcome::NotConverged(failed)
    })
}
