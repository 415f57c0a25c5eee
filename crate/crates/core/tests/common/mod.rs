#![allow(dead_code)]

use std::path::PathBuf;

use vidsource::bmff::{extract_parameter_set_blobs, parse_file};
use vidsource::h264::{parse_pps, parse_sps, PpsParams, SpsParams, TraceEntry};

pub const FIXTURES: &[&str] = &[
    "baseline_720p",
    "main_360p_bframes",
    "high_1080p_hrd",
    "high_cqm_240p",
    "high_interlaced_576i",
    "high444_qcif",
];

pub fn fixture_path(name: &str, ext: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../core/tests/data/h264/{name}.{ext}"))
}

/// One header section of a reference trace.
pub struct RefSection {
    pub title: String,
    pub entries: Vec<TraceEntry>,
}

/// The reference analyzer spells one element differently from the standard.
fn canonical_name(name: &str) -> &str {
    match name {
        "gaps_in_frame_num_allowed_flag" => "gaps_in_frame_num_value_allowed_flag",
        other => other,
    }
}

/// Parses `<bit> <name> <bits> = <value>` lines grouped under section titles.
pub fn load_trace(name: &str) -> Vec<RefSection> {
    let text = std::fs::read_to_string(fixture_path(name, "trace")).unwrap();
    let mut out: Vec<RefSection> = Vec::new();
    for line in text.lines() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let is_entry = toks.len() >= 5 && toks[0].parse::<usize>().is_ok() && toks[toks.len() - 2] == "=";
        if !is_entry {
            out.push(RefSection { title: line.trim().to_owned(), entries: Vec::new() });
            continue;
        }
        let entry = TraceEntry {
            bit: toks[0].parse().unwrap(),
            name: canonical_name(toks[1]).to_owned(),
            value: toks[toks.len() - 1].parse().unwrap(),
        };
        out.last_mut().expect("entry before any section").entries.push(entry);
    }
    out
}

pub fn decode_fixture(name: &str) -> (SpsParams, Vec<PpsParams>) {
    let tree = parse_file(fixture_path(name, "mp4")).unwrap();
    let cfg = extract_parameter_set_blobs(&tree).unwrap().remove(0);
    let sps = parse_sps(&cfg.sps[0]).unwrap();
    let pps = cfg.pps.iter().map(|b| parse_pps(b, Some(&sps)).unwrap()).collect();
    (sps, pps)
}

/// Compares decoded traces against the reference; returns mismatch messages.
pub fn compare_fixture(name: &str) -> Vec<String> {
    let reference = load_trace(name);
    let (sps, pps) = decode_fixture(name);
    let mut ours = vec![("Sequence Parameter Set", sps.trace.clone())];
    ours.extend(pps.iter().map(|p| ("Picture Parameter Set", p.trace.clone())));
    let mut errors = Vec::new();
    if reference.len() != ours.len() {
        errors.push(format!("{name}: {} reference sections, {} decoded", reference.len(), ours.len()));
        return errors;
    }
    for (r, (title, trace)) in reference.iter().zip(&ours) {
        if r.title != *title {
            errors.push(format!("{name}: section {:?} vs {title:?}", r.title));
        }
        if r.entries.len() != trace.len() {
            errors.push(format!("{name}/{title}: {} reference entries, {} decoded", r.entries.len(), trace.len()));
        }
        for (a, b) in r.entries.iter().zip(trace) {
            if a != b {
                errors.push(format!("{name}/{title}: reference {a:?} decoded {b:?}"));
                break;
            }
        }
    }
    // Every named parameter must agree with the trace value of the same name.
    let sections = [(&sps.params, &reference[0])]
        .into_iter()
        .chain(sps.vui.iter().map(|v| (v, &reference[0])))
        .chain(pps.iter().zip(&reference[1..]).map(|(p, r)| (&p.params, r)));
    for (set, section) in sections {
        for param in set.params() {
            let scalar = section.entries.iter().find(|e| e.name == param.name).map(|e| e.value);
            let listed: Vec<i64> = section
                .entries
                .iter()
                .filter(|e| e.name.starts_with(&format!("{}[", param.name)))
                .map(|e| e.value)
                .collect();
            let expected = match (scalar, listed.is_empty()) {
                (Some(v), _) => v.to_string(),
                (None, false) => format!("[{}]", listed.iter().map(i64::to_string).collect::<Vec<_>>().join(",")),
                (None, true) => "absent".to_owned(),
            };
            if param.value.to_string() != expected {
                errors.push(format!("{name}: {} = {} expected {expected}", param.name, param.value));
            }
        }
    }
    errors
}
