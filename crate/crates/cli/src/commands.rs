use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use vidsource::bmff::{BoxNode, BoxTree};
use vidsource::classifier::{
    balanced_weights, kfold_cv, kfold_cv_vectors, CvConfig, CvReport, Model, Predictor, TrainConfig,
};
use vidsource::h264::{core_param_vector, EncodingSetting, ParamSet, ParamSetKind, CORE_PARAM_NAMES};
use vidsource::metaclass::{signature, Abstraction};
use vidsource::pipeline::{analyze_file, Analysis};
use vidsource::synth::{class_recipes, generate, SyntheticSpec};
use vidsource::tree::{ExclusionList, ExclusionProfile, MetaTree};
use vidsource::ModelFile;

use crate::manifest::{read_manifest, write_jsonl, ManifestEntry};
use crate::vectors::{self, VectorRow};
use crate::{Cli, CliError, Command, CoreParamsCommand, CvArgs, GlobalOpts, VectorOpts};

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Inspect(a) => inspect(g, a),
        Command::Synth(a) => synth(g, a),
        Command::Train(a) => train(g, &a.manifest, &a.model),
        Command::Predict(a) => predict(g, &a.files, &a.model),
        Command::Evaluate(a) => evaluate(g, &a.manifest, &a.cv),
        Command::CoreParams(c) => core_params(g, c),
    }
}

fn exclusion(g: &GlobalOpts) -> Result<ExclusionList, CliError> {
    match &g.exclusion_profile {
        Some(spec) => ExclusionList::resolve(spec).map_err(CliError::Usage),
        None => Ok(ExclusionList::builtin(ExclusionProfile::Content)),
    }
}

fn load_model(path: &Path) -> Result<ModelFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(ModelFile::from_json(&text)?)
}

/// The list a model was trained under: the one given on the command line,
/// which must match, or the built-in list of the same name.
fn model_exclusion(g: &GlobalOpts, model: &ModelFile) -> Result<ExclusionList, CliError> {
    let list = match &g.exclusion_profile {
        Some(spec) => ExclusionList::resolve(spec).map_err(CliError::Usage)?,
        None => ExclusionList::resolve(&model.exclusion.name).map_err(|_| {
            CliError::Mismatch(format!(
                "model was trained under exclusion list {:?}; pass it with --exclusion-profile",
                model.exclusion.name
            ))
        })?,
    };
    model.check_exclusion(&list)?;
    Ok(list)
}

fn analyze(path: &Path, excl: &ExclusionList) -> Result<Analysis, CliError> {
    analyze_file(path, excl).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

struct Labeled {
    trees: Vec<MetaTree>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

fn class_index(labels: &[String]) -> (Vec<usize>, Vec<String>) {
    let names: Vec<String> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let idx = labels.iter().map(|l| names.binary_search(l).expect("name collected above")).collect();
    (idx, names)
}

fn load_corpus(entries: &[ManifestEntry], excl: &ExclusionList) -> Result<Labeled, CliError> {
    let analyses: Vec<Result<Analysis, CliError>> = entries.par_iter().map(|e| analyze(&e.path, excl)).collect();
    let mut trees = Vec::with_capacity(entries.len());
    for (a, e) in analyses.into_iter().zip(entries) {
        let a = a?;
        if let Some(err) = &a.codec_error {
            log::warn!("{}: no codec subtree: {err}", e.path.display());
        }
        trees.push(a.tree);
    }
    let labels: Vec<String> = entries.iter().map(|e| e.label.clone()).collect();
    let (labels, class_names) = class_index(&labels);
    Ok(Labeled { trees, labels, class_names })
}

fn inspect(g: &GlobalOpts, a: &crate::InspectArgs) -> Result<u8, CliError> {
    let model = a.model.as_deref().filter(|_| a.signature).map(load_model).transpose()?;
    let excl = match &model {
        Some(m) => model_exclusion(g, m)?,
        None => exclusion(g)?,
    };
    let an = analyze(&a.file, &excl)?;
    let boxes = a.boxes || !(a.params || a.tree || a.signature);
    let mut out = io::stdout().lock();
    if a.json {
        let mut doc = serde_json::Map::new();
        if boxes {
            doc.insert("boxes".into(), serde_json::to_value(&an.boxes).expect("serializable"));
        }
        if a.params {
            doc.insert("params".into(), serde_json::to_value(&an.setting).expect("serializable"));
            doc.insert("codec_error".into(), json!(an.codec_error));
        }
        if a.tree {
            doc.insert("tree".into(), serde_json::to_value(&an.tree).expect("serializable"));
        }
        if a.signature {
            doc.insert("signature".into(), signature_json(&an.tree, model.as_ref()));
        }
        serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
        writeln!(out)?;
        return Ok(0);
    }
    let mut s = String::new();
    if boxes {
        render_boxes(&an.boxes, &mut s);
    }
    if a.params {
        render_params(an.setting.as_ref(), an.codec_error.as_deref(), &mut s);
    }
    if a.tree {
        let _ = write!(s, "{}", an.tree);
    }
    if a.signature {
        let v = signature_json(&an.tree, model.as_ref());
        for (k, val) in v.as_object().expect("object") {
            let _ = writeln!(s, "{k}\t{}", val.as_str().map_or_else(|| val.to_string(), str::to_owned));
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(0)
}

fn signature_json(tree: &MetaTree, model: Option<&ModelFile>) -> serde_json::Value {
    let mut v = json!({
        "hash": signature(tree, Abstraction::Hash).key(),
        "ldp": signature(tree, Abstraction::Ldp).key(),
    });
    if let Some(Model::Hierarchical(h)) = model.map(|m| &m.model) {
        v["metaclass"] = json!(h.index.assign(tree).to_string());
    }
    v
}

fn render_boxes(t: &BoxTree, s: &mut String) {
    fn node(b: &BoxNode, depth: usize, s: &mut String) {
        let pad = "  ".repeat(depth);
        let size = match b.declared_size {
            0 => format!("{} (to end)", b.size),
            d if b.header_len >= 16 && d == b.size => format!("{d} (largesize)"),
            d => d.to_string(),
        };
        let flag = if b.malformed { " [malformed]" } else { "" };
        let _ = writeln!(s, "{pad}{} offset={} size={size}{flag}", b.box_type, b.offset);
        for (name, v) in &b.fields {
            let _ = writeln!(s, "{pad}  {name} = {v}");
        }
        for c in &b.children {
            node(c, depth + 1, s);
        }
    }
    for b in &t.boxes {
        node(b, 0, s);
    }
    if let Some(tr) = &t.truncated {
        let _ = writeln!(
            s,
            "truncated at offset {}: declared size {}, {} bytes available ({:?})",
            tr.offset, tr.declared_size, tr.available, tr.reason
        );
    }
}

fn render_params(setting: Option<&EncodingSetting>, err: Option<&str>, s: &mut String) {
    let Some(st) = setting else {
        let _ = writeln!(s, "no parameter sets: {}", err.unwrap_or("unknown reason"));
        return;
    };
    let table = |title: String, set: &ParamSet, s: &mut String| {
        let _ = writeln!(s, "{title}");
        for p in set.params() {
            let _ = writeln!(s, "  {:<40} {}", p.name, p.value);
        }
    };
    table(format!("SPS ({:?})", st.sps.status), &st.sps.params, s);
    let absent = ParamSet::new(ParamSetKind::Vui);
    table("VUI".into(), st.vui().unwrap_or(&absent), s);
    for (i, p) in st.pps.iter().enumerate() {
        table(format!("PPS {i} ({:?})", p.status), &p.params, s);
    }
}

fn synth(g: &GlobalOpts, a: &crate::SynthArgs) -> Result<u8, CliError> {
    if a.classes == 0 || a.samples == 0 {
        return Err(CliError::Usage("--classes and --samples must be positive".into()));
    }
    if 2 * a.clone_pairs > a.classes {
        return Err(CliError::Usage("--clone-pairs needs two classes per pair".into()));
    }
    let spec = SyntheticSpec { classes: a.classes, samples_per_class: a.samples, seed: g.seed, clone_pairs: a.clone_pairs };
    let recipes = class_recipes(&spec);
    let files = generate(&spec);
    let mut entries = Vec::with_capacity(files.len());
    for f in &files {
        let class = &recipes[f.class].name;
        let rel = PathBuf::from(class).join(&f.file_name);
        fs::create_dir_all(a.out.join(class))?;
        fs::write(a.out.join(&rel), &f.bytes)?;
        entries.push(ManifestEntry { path: rel, label: class.clone(), split: None });
    }
    write_jsonl(BufWriter::new(fs::File::create(a.out.join("manifest.jsonl"))?), &entries)?;
    fs::write(a.out.join("recipes.json"), serde_json::to_string_pretty(&recipes).map_err(io::Error::from)?)?;
    println!("wrote {} files in {} classes to {}", files.len(), a.classes, a.out.display());
    Ok(0)
}

fn train_config(g: &GlobalOpts) -> TrainConfig {
    TrainConfig { representation: g.representation, level1: g.level1 }
}

fn train(g: &GlobalOpts, manifest: &Path, model_path: &Path) -> Result<u8, CliError> {
    let excl = exclusion(g)?;
    let entries = read_manifest(manifest)?;
    let data = load_corpus(&entries, &excl)?;
    if data.class_names.len() < 2 {
        return Err(CliError::Input(format!("need at least 2 classes, manifest has {}", data.class_names.len())));
    }
    let refs: Vec<&MetaTree> = data.trees.iter().collect();
    let cfg = train_config(g);
    let model = Model::<f64>::train(&refs, &data.labels, data.class_names.len(), cfg)?;
    let summary = match &model {
        Model::Hierarchical(h) => format!(
            "{} metaclasses ({} with a level-2 tree), fallback dimension {}",
            h.index.len(),
            h.per_metaclass.len(),
            h.fallback.vocabulary.len()
        ),
        Model::Flat(f) => format!("dimension {}", f.vocabulary.len()),
    };
    let file = ModelFile::new(model, cfg.representation, cfg.level1, &excl, data.class_names.clone());
    fs::write(model_path, file.to_json())?;
    println!(
        "trained {} model on {} files, {} classes; {summary}; wrote {}",
        cfg.representation,
        data.trees.len(),
        data.class_names.len(),
        model_path.display()
    );
    Ok(0)
}

fn predict(g: &GlobalOpts, files: &[PathBuf], model_path: &Path) -> Result<u8, CliError> {
    let model = load_model(model_path)?;
    let excl = model_exclusion(g, &model)?;
    let results: Vec<Result<String, CliError>> = files
        .par_iter()
        .map(|f| {
            let an = analyze(f, &excl)?;
            let p = model.model.predict(&an.tree);
            let metaclass = match model.model {
                Model::Hierarchical(_) => p.metaclass.to_string(),
                Model::Flat(_) => "-".to_owned(),
            };
            Ok(format!("{}\t{}\t{metaclass}\t{}", f.display(), model.class_names[p.class], p.fallback))
        })
        .collect();
    let mut out = io::stdout().lock();
    let mut failed = 0;
    for r in results {
        match r {
            Ok(line) => writeln!(out, "{line}")?,
            Err(e) => {
                failed += 1;
                eprintln!("error: {e}");
            }
        }
    }
    Ok(if failed > 0 { 2 } else { 0 })
}

fn cv_config(g: &GlobalOpts, cv: &CvArgs) -> CvConfig {
    CvConfig { k: cv.folds, runs: cv.runs, seed: g.seed }
}

fn write_report(report: &CvReport, cv: &CvArgs) -> Result<(), CliError> {
    print!("{}", report.table());
    if let Some(p) = &cv.confusion {
        fs::write(p, report.confusion_csv())?;
    }
    if let Some(p) = &cv.report {
        fs::write(p, serde_json::to_string_pretty(report).map_err(io::Error::from)?)?;
    }
    Ok(())
}

fn evaluate(g: &GlobalOpts, manifest: &Path, cv: &CvArgs) -> Result<u8, CliError> {
    let excl = exclusion(g)?;
    let entries = read_manifest(manifest)?;
    let data = load_corpus(&entries, &excl)?;
    let report = kfold_cv::<f64>(&data.trees, &data.labels, &data.class_names, train_config(g), cv_config(g, cv))?;
    println!("representation {}, level-1 {}, exclusion list {}", g.representation, g.level1, excl.name);
    write_report(&report, cv)?;
    Ok(0)
}

pub const CORE_MODEL_FORMAT: &str = "vidsource-core-params";

/// A decision tree over core-parameter columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreParamsModel {
    pub format: String,
    pub version: u32,
    pub columns: Vec<String>,
    pub brand_level: bool,
    pub class_names: Vec<String>,
    pub predictor: Predictor<f64>,
}

fn read_vectors(path: &Path) -> Result<Vec<VectorRow>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    vectors::parse_vectors(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Feature matrix, class ids and class names under the chosen grouping.
pub fn vector_dataset(rows: &[VectorRow], opts: &VectorOpts) -> (Vec<Vec<f64>>, Vec<usize>, Vec<String>, Vec<usize>) {
    let columns = vectors::kept_columns(opts.drop_user_adjustable);
    let labels: Vec<String> =
        rows.iter().map(|r| if opts.brand { vectors::brand_label(&r.label) } else { r.label.clone() }).collect();
    let (y, names) = class_index(&labels);
    let x = rows.iter().map(|r| vectors::project(&r.params, &columns)).collect();
    (x, y, names, columns)
}

fn core_params(g: &GlobalOpts, c: &CoreParamsCommand) -> Result<u8, CliError> {
    match c {
        CoreParamsCommand::Vector { sps, pps, height } => {
            let blob = |h: &str| hex::decode(h.trim()).map_err(|e| CliError::Input(format!("bad hex {h:?}: {e}")));
            let pps: Vec<Vec<u8>> = pps.iter().map(|p| blob(p)).collect::<Result<_, _>>()?;
            let setting = EncodingSetting::from_blobs(&blob(sps)?, &pps).map_err(|e| CliError::Input(e.to_string()))?;
            let h = height.or_else(|| setting.sps.frame_size().map(|s| s.1)).ok_or_else(|| {
                CliError::Input("SPS does not signal a frame size; pass --height".into())
            })?;
            let v = core_param_vector(&setting, h).map_err(|e| CliError::Input(e.to_string()))?;
            let mut out = io::stdout().lock();
            for (n, x) in CORE_PARAM_NAMES.iter().zip(v.values) {
                writeln!(out, "{n}\t{x}")?;
            }
            Ok(0)
        }
        CoreParamsCommand::Extract { manifest, out } => {
            let excl = exclusion(g)?;
            let entries = read_manifest(manifest)?;
            let rows: Vec<Result<(String, vidsource::h264::CoreParams), CliError>> = entries
                .par_iter()
                .map(|e| {
                    let an = analyze(&e.path, &excl)?;
                    let st = an.setting.ok_or_else(|| {
                        CliError::Input(format!("{}: {}", e.path.display(), an.codec_error.unwrap_or_default()))
                    })?;
                    let h = st.sps.frame_size().map_or(0, |s| s.1);
                    let v = core_param_vector(&st, h).map_err(|err| CliError::Input(format!("{}: {err}", e.path.display())))?;
                    Ok((e.label.clone(), v))
                })
                .collect();
            let mut w = BufWriter::new(fs::File::create(out)?);
            vectors::write_header(&mut w)?;
            for r in rows {
                let (label, v) = r?;
                vectors::write_row(&mut w, &label, &v)?;
            }
            w.flush()?;
            println!("wrote {} vectors to {}", entries.len(), out.display());
            Ok(0)
        }
        CoreParamsCommand::Evaluate { vectors: path, opts, cv } => {
            let rows = read_vectors(path)?;
            let (x, y, names, columns) = vector_dataset(&rows, opts);
            let report = kfold_cv_vectors(&x, &y, &names, cv_config(g, cv))?;
            println!(
                "{} vectors, {} classes ({}), {} columns",
                x.len(),
                names.len(),
                if opts.brand { "brand level" } else { "model level" },
                columns.len()
            );
            write_report(&report, cv)?;
            Ok(0)
        }
        CoreParamsCommand::Train { vectors: path, opts, model } => {
            let rows = read_vectors(path)?;
            let (x, y, names, columns) = vector_dataset(&rows, opts);
            let w = balanced_weights::<f64>(&y, names.len());
            let predictor = Predictor::fit(&x, &y, &w)?;
            let m = CoreParamsModel {
                format: CORE_MODEL_FORMAT.into(),
                version: 1,
                columns: columns.iter().map(|&c| CORE_PARAM_NAMES[c].to_owned()).collect(),
                brand_level: opts.brand,
                class_names: names,
                predictor,
            };
            fs::write(model, serde_json::to_string(&m).map_err(io::Error::from)?)?;
            println!("trained on {} vectors, {} classes; wrote {}", x.len(), m.class_names.len(), model.display());
            Ok(0)
        }
        CoreParamsCommand::Predict { vectors: path, model } => {
            let text = fs::read_to_string(model).map_err(|e| CliError::Input(format!("{}: {e}", model.display())))?;
            let m: CoreParamsModel = serde_json::from_str(&text).map_err(|e| CliError::Mismatch(e.to_string()))?;
            if m.format != CORE_MODEL_FORMAT || m.version != 1 {
                return Err(CliError::Mismatch(format!("{} is not a core-parameter model", model.display())));
            }
            let columns: Vec<usize> = m
                .columns
                .iter()
                .map(|c| CORE_PARAM_NAMES.iter().position(|n| n == c))
                .collect::<Option<_>>()
                .ok_or_else(|| CliError::Mismatch("model names an unknown column".into()))?;
            let rows = read_vectors(path)?;
            let mut out = io::stdout().lock();
            for (i, r) in rows.iter().enumerate() {
                let p = m.predictor.predict(&vectors::project(&r.params, &columns))?;
                writeln!(out, "{}\t{}\t{}", i + 1, r.label, m.class_names[p])?;
            }
            Ok(0)
        }
    }
}
