use std::fmt::Write as _;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use tropcyl_core::fixtures::{primitive_twig_types, standard_fans};
use tropcyl_core::{
    build_deformation, build_model, class_from_profile, contributing_classes,
    count_primitive_cylinder, generate_walls_with_rule, intersect, replay_induction, splitting_sum,
    ClassKind, CurveClass, ElementaryCountTable, FamilyTag, IntersectionProfile, LatticeVector,
    PrimitiveCylinder, ToricModel, WallRule, WallStructure,
};

use crate::config::{load_json, Config, CylinderSpec};
use crate::error::CliError;
use crate::svg::{render_tree, render_walls};

/// Output of a command: text for stdout and files to write.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
}

fn color(on: bool, pass: bool, text: &str) -> String {
    match (on, pass) {
        (false, _) => text.to_string(),
        (true, true) => format!("\x1b[32m{text}\x1b[0m"),
        (true, false) => format!("\x1b[31m{text}\x1b[0m"),
    }
}

pub struct WallsArgs {
    pub steps: Option<usize>,
    pub norm_bound: Option<i64>,
    pub rule: Option<WallRule>,
    pub is_wall: Option<LatticeVector>,
    pub svg: Option<PathBuf>,
    pub json: bool,
}

pub fn wall_structure(
    config: &Config,
    model: &ToricModel,
    steps: Option<usize>,
    bound: Option<i64>,
    rule: Option<WallRule>,
) -> WallStructure {
    generate_walls_with_rule(
        model,
        steps.unwrap_or(config.walls.steps),
        bound.unwrap_or(config.walls.norm_bound),
        rule.unwrap_or(config.walls.rule),
    )
}

pub fn cmd_walls(config: &Config, args: &WallsArgs) -> Result<Output, CliError> {
    let model = config.model()?;
    let walls = wall_structure(config, &model, args.steps, args.norm_bound, args.rule);
    let mut out = Output::default();
    if let Some(d) = args.is_wall {
        if d.is_zero() {
            return Err(CliError::Parse(
                "--is-wall: the zero vector has no direction".into(),
            ));
        }
        out.stdout = format!("{}\n", walls.contains(d));
        return Ok(out);
    }
    let listing = walls.walls(&model);
    if args.json {
        out.stdout = serde_json::to_string_pretty(&listing).expect("serializable") + "\n";
    } else {
        for w in &listing {
            let _ = writeln!(out.stdout, "{} {} {}", w.direction, w.step, w.norm);
        }
    }
    if let Some(path) = &args.svg {
        out.files
            .push((path.clone(), render_walls(&model, &walls, &config.render)));
    }
    Ok(out)
}

pub struct CountArgs {
    pub spec: PathBuf,
    pub table: ElementaryCountTable,
    pub json: bool,
}

#[derive(Serialize)]
struct ClassEntry {
    choice: Vec<usize>,
    class: IntersectionProfile,
    factors: Vec<u64>,
    count: u64,
}

#[derive(Serialize)]
struct SplittingEntry {
    choice: Vec<usize>,
    classes: Vec<IntersectionProfile>,
    counts: Vec<u64>,
}

#[derive(Serialize)]
struct QueryEntry {
    class: IntersectionProfile,
    kind: ClassKind,
    count: u64,
    splittings: Vec<SplittingEntry>,
}

fn fmt_profile(p: &IntersectionProfile) -> String {
    format!("dD={:?} dE={:?}", p.d_d, p.d_e)
        .replace(' ', "")
        .replace("dE", " dE")
}

fn fmt_rays(model: &ToricModel) -> String {
    model
        .fan()
        .rays()
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_count(config: &Config, args: &CountArgs) -> Result<Output, CliError> {
    let base = config.model()?;
    let spec: CylinderSpec = load_json(&args.spec, "spec")?;
    let cyl = spec.assemble(&base)?;
    let model = cyl.model();
    let table = &args.table;

    let classes = contributing_classes(table, &cyl)?
        .into_iter()
        .map(|c| ClassEntry {
            choice: c.choice,
            class: c.profile,
            factors: c.factors,
            count: c.count,
        })
        .collect::<Vec<_>>();

    let kind = if spec.extended {
        ClassKind::Extended
    } else {
        ClassKind::Infinitesimal
    };
    let query = match spec.class_profile(&cyl)? {
        Some(profile) => {
            let beta = class_from_profile(model, &profile)
                .map_err(|e| CliError::Parse(format!("class: {e}")))?;
            let result = count_primitive_cylinder(table, &cyl, &beta, kind)?;
            let splittings = result
                .splittings
                .iter()
                .map(|s| {
                    Ok(SplittingEntry {
                        choice: s.choice.clone(),
                        classes: s
                            .classes
                            .iter()
                            .map(|c| intersect(model, c))
                            .collect::<Result<_, _>>()
                            .map_err(|e| CliError::Internal(e.to_string()))?,
                        counts: s.counts.clone(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Some(QueryEntry {
                class: profile,
                kind,
                count: result.value,
                splittings,
            })
        }
        None => None,
    };

    let mut out = Output::default();
    if args.json {
        let mut doc = json!({
            "spec": spec,
            "working_rays": model.fan().rays(),
            "working_blowups": model.blowups(),
            "classes": classes,
        });
        if let Some(q) = &query {
            doc["query"] = serde_json::to_value(q).expect("serializable");
        }
        out.stdout = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
        return Ok(out);
    }
    let s = &mut out.stdout;
    let _ = writeln!(s, "working rays: {}", fmt_rays(model));
    let _ = writeln!(
        s,
        "cylinder: p1 {} p2 {} bend ({},{}) twig {}",
        cyl.p1(),
        cyl.p2(),
        spec.spine.bend_at[0],
        spec.spine.bend_at[1],
        cyl.twig_type()
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    let _ = writeln!(s, "contributing classes: {}", classes.len());
    for c in &classes {
        let _ = writeln!(
            s,
            "  choice {:?} {} count {}",
            c.choice,
            fmt_profile(&c.class),
            c.count
        );
    }
    if let Some(q) = &query {
        let kind = match q.kind {
            ClassKind::Extended => "extended",
            ClassKind::Infinitesimal => "infinitesimal",
        };
        let _ = writeln!(
            s,
            "class ({kind}) {} count {}",
            fmt_profile(&q.class),
            q.count
        );
        for sp in &q.splittings {
            let _ = writeln!(
                s,
                "  splitting choice {:?} counts {:?}",
                sp.choice, sp.counts
            );
        }
    }
    Ok(out)
}

pub struct VerifyArgs {
    pub spec: Option<PathBuf>,
    pub table: ElementaryCountTable,
    pub seed: u64,
    pub cases: usize,
    pub json: bool,
    pub color: bool,
}

#[derive(Serialize)]
struct CaseReport {
    id: usize,
    rays: Vec<LatticeVector>,
    blowups: Vec<usize>,
    twig_type: Vec<LatticeVector>,
    classes: usize,
    checked: usize,
    steps: usize,
}

/// Checks the closed form against the splitting sum and replays the
/// induction for each of `classes` (infinitesimal classes are derived).
fn verify_cylinder(
    config: &Config,
    table: &ElementaryCountTable,
    cyl: &PrimitiveCylinder,
    extra: &[CurveClass],
) -> Result<(usize, usize, usize), CliError> {
    let data = build_deformation(cyl, &config.anchors.anchors())?;
    let contributions = contributing_classes(table, cyl)?;
    let mut hats: Vec<CurveClass> = contributions.iter().map(|c| c.class.clone()).collect();
    hats.extend(extra.iter().cloned());
    let mut steps = 0;
    for hat in &hats {
        let fast = count_primitive_cylinder(table, cyl, hat, ClassKind::Extended)?.value;
        let oracle = splitting_sum(table, cyl, hat, ClassKind::Extended)?;
        if fast != oracle {
            return Err(CliError::Identity {
                k: 0,
                what: "closed form = splitting sum".into(),
                lhs: fast,
                rhs: oracle,
            });
        }
        let beta = hat - cyl.delta_hat();
        let report = replay_induction(&data, table, &beta)?;
        steps = steps.max(report.steps.iter().map(|s| s.k).max().unwrap_or(0));
    }
    Ok((contributions.len(), hats.len(), steps))
}

fn random_case(rng: &mut ChaCha8Rng) -> (ToricModel, Vec<LatticeVector>) {
    let fans = standard_fans();
    loop {
        let (_, fan) = fans.choose(rng).expect("nonempty").clone();
        let blowups: Vec<i64> = (0..fan.len()).map(|_| rng.gen_range(0..=3)).collect();
        let model = build_model(fan, &blowups).expect("valid blowups");
        let types = primitive_twig_types(&model, 3);
        if let Some(t) = types.choose(rng) {
            return (model.clone(), t.clone());
        }
    }
}

fn perturbation(rng: &mut ChaCha8Rng, model: &ToricModel) -> CurveClass {
    loop {
        let mut c = CurveClass::zero(model);
        for i in 0..model.num_rays() {
            let k = rng.gen_range(-2..=2);
            c = &c + &CurveClass::toric_divisor(model, i).scale(k);
        }
        if !c.is_zero() {
            return c;
        }
    }
}

pub fn cmd_verify(config: &Config, args: &VerifyArgs) -> Result<Output, CliError> {
    let mut out = Output::default();
    let mut reports = Vec::new();
    if let Some(path) = &args.spec {
        let base = config.model()?;
        let spec: CylinderSpec = load_json(path, "spec")?;
        let cyl = spec.assemble(&base)?;
        let mut extra = Vec::new();
        if let Some(profile) = spec.class_profile(&cyl)? {
            let beta = class_from_profile(cyl.model(), &profile)
                .map_err(|e| CliError::Parse(format!("class: {e}")))?;
            extra.push(if spec.extended {
                beta
            } else {
                &beta + cyl.delta_hat()
            });
        }
        let (classes, checked, steps) = verify_cylinder(config, &args.table, &cyl, &extra)?;
        reports.push(CaseReport {
            id: 0,
            rays: cyl.base().fan().rays().to_vec(),
            blowups: cyl.base().blowups().to_vec(),
            twig_type: cyl.twig_type().to_vec(),
            classes,
            checked,
            steps,
        });
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        for id in 0..args.cases {
            let (model, twig) = random_case(&mut rng);
            let cyl = PrimitiveCylinder::canonical(&model, &twig)?;
            let contributions = contributing_classes(&args.table, &cyl)?;
            let pick = &contributions[rng.gen_range(0..contributions.len())].class;
            let perturbed = pick + &perturbation(&mut rng, cyl.model());
            let (classes, checked, steps) =
                verify_cylinder(config, &args.table, &cyl, &[perturbed])?;
            reports.push(CaseReport {
                id,
                rays: model.fan().rays().to_vec(),
                blowups: model.blowups().to_vec(),
                twig_type: twig,
                classes,
                checked,
                steps,
            });
        }
    }
    if args.json {
        let doc = json!({ "status": "PASS", "cases": reports });
        out.stdout = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
        return Ok(out);
    }
    for r in &reports {
        let _ = writeln!(
            out.stdout,
            "case {}: twig {} classes {} checked {} induction steps {}: {}",
            r.id,
            r.twig_type
                .iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            r.classes,
            r.checked,
            r.steps,
            color(args.color, true, "PASS")
        );
    }
    let _ = writeln!(
        out.stdout,
        "{} ({} cases)",
        color(args.color, true, "PASS"),
        reports.len()
    );
    Ok(out)
}

pub struct RenderArgs {
    pub spec: Option<PathBuf>,
    pub target: Option<String>,
    pub svg: Option<PathBuf>,
    pub steps: Option<usize>,
    pub norm_bound: Option<i64>,
    pub rule: Option<WallRule>,
}

pub fn cmd_render(config: &Config, args: &RenderArgs) -> Result<Output, CliError> {
    let model = config.model()?;
    let walls = wall_structure(config, &model, args.steps, args.norm_bound, args.rule);
    let target = args.target.clone().unwrap_or_else(|| {
        if args.spec.is_some() {
            "cylinder".into()
        } else {
            "walls".into()
        }
    });
    let svg = match target.as_str() {
        "walls" => render_walls(&model, &walls, &config.render),
        other => {
            let tag = match other {
                "cylinder" => None,
                tag => Some(
                    tag.parse::<FamilyTag>()
                        .map_err(|_| CliError::RenderTarget(tag.to_string()))?,
                ),
            };
            let path = args
                .spec
                .as_ref()
                .ok_or_else(|| CliError::Parse(format!("render target `{other}` needs --spec")))?;
            let spec: CylinderSpec = load_json(path, "spec")?;
            let cyl = spec.assemble(&model)?;
            let tree = match tag {
                None => cyl.tree(spec.extended)?,
                Some(tag) => {
                    let data = build_deformation(&cyl, &config.anchors.anchors())?;
                    data.family(tag)
                        .ok_or_else(|| CliError::RenderTarget(other.to_string()))?
                        .tree
                        .clone()
                }
            };
            render_tree(&model, &walls, &tree, &config.render)
        }
    };
    let mut out = Output::default();
    match &args.svg {
        Some(path) => out.files.push((path.clone(), svg)),
        None => out.stdout = svg,
    }
    Ok(out)
}
