use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const CONTENT_VOLATILE: &str = include_str!("../../profiles/content-volatile.txt");
const USER_ADJUSTABLE: &str = include_str!("../../profiles/user-adjustable.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExclusionProfile {
    None,
    Content,
    /// Content-volatile fields plus user-adjustable ones.
    UserAdjustable,
}

impl ExclusionProfile {
    pub fn name(self) -> &'static str {
        match self {
            ExclusionProfile::None => "none",
            ExclusionProfile::Content => "content",
            ExclusionProfile::UserAdjustable => "user-adjustable",
        }
    }
}

impl FromStr for ExclusionProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(ExclusionProfile::None),
            "content" | "content-volatile" => Ok(ExclusionProfile::Content),
            "user-adjustable" => Ok(ExclusionProfile::UserAdjustable),
            other => Err(format!("unknown exclusion profile {other:?}")),
        }
    }
}

impl fmt::Display for ExclusionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Segment {
    Label(String),
    /// `*`: exactly one label.
    One,
    /// `**`: zero or more labels.
    Many,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    segments: Vec<Segment>,
    text: String,
}

impl Pattern {
    /// Labels separated by `/`; `%XX` escapes a byte inside a label.
    pub fn parse(text: &str) -> Result<Self, String> {
        let segments = text
            .split('/')
            .map(|s| match s {
                "" => Err(format!("empty label in pattern {text:?}")),
                "*" => Ok(Segment::One),
                "**" => Ok(Segment::Many),
                label => unescape(label).map(Segment::Label),
            })
            .collect::<Result<_, _>>()?;
        Ok(Pattern { segments, text: text.to_owned() })
    }

    pub fn matches<S: AsRef<str>>(&self, path: &[S]) -> bool {
        matches_from(&self.segments, path)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn matches_from<S: AsRef<str>>(segs: &[Segment], path: &[S]) -> bool {
    match segs.split_first() {
        None => path.is_empty(),
        Some((Segment::Many, rest)) => (0..=path.len()).any(|k| matches_from(rest, &path[k..])),
        Some((seg, rest)) => match path.split_first() {
            None => false,
            Some((label, tail)) => {
                let hit = match seg {
                    Segment::Label(l) => l == label.as_ref(),
                    _ => true,
                };
                hit && matches_from(rest, tail)
            }
        },
    }
}

fn unescape(label: &str) -> Result<String, String> {
    let mut out = Vec::new();
    let bytes = label.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = label.get(i + 1..i + 3).ok_or_else(|| format!("bad escape in {label:?}"))?;
            out.push(u8::from_str_radix(hex, 16).map_err(|_| format!("bad escape in {label:?}"))?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| format!("escape in {label:?} is not UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionList {
    pub name: String,
    pub version: u32,
    patterns: Vec<Pattern>,
}

impl ExclusionList {
    pub fn empty() -> Self {
        ExclusionList { name: "none".into(), version: 1, patterns: Vec::new() }
    }

    pub fn builtin(profile: ExclusionProfile) -> Self {
        match profile {
            ExclusionProfile::None => Self::empty(),
            ExclusionProfile::Content => {
                Self::parse("content", CONTENT_VOLATILE).expect("shipped profile parses")
            }
            ExclusionProfile::UserAdjustable => {
                let mut list = Self::parse("user-adjustable", CONTENT_VOLATILE).expect("shipped profile parses");
                let extra = Self::parse("user-adjustable", USER_ADJUSTABLE).expect("shipped profile parses");
                list.patterns.extend(extra.patterns);
                list.version = extra.version;
                list
            }
        }
    }

    /// One pattern per line; `#` starts a comment; `# version: N` sets the
    /// version.
    pub fn parse(name: &str, text: &str) -> Result<Self, String> {
        let mut version = 1;
        let mut patterns = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    version = v.trim().parse().map_err(|_| format!("bad version line {line:?}"))?;
                }
                continue;
            }
            if !line.is_empty() {
                patterns.push(Pattern::parse(line)?);
            }
        }
        Ok(ExclusionList { name: name.to_owned(), version, patterns })
    }

    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let name = path.file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned());
        Self::parse(&name, &text)
    }

    /// A built-in profile name or a path to a pattern file.
    pub fn resolve(spec: &str) -> Result<Self, String> {
        match spec.parse::<ExclusionProfile>() {
            Ok(p) => Ok(Self::builtin(p)),
            Err(_) if Path::new(spec).is_file() => Self::from_file(Path::new(spec)),
            Err(e) => Err(e),
        }
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn matches<S: AsRef<str>>(&self, path: &[S]) -> bool {
        self.patterns.iter().any(|p| p.matches(path))
    }

    /// Digest of the version and the pattern lines; models record it and
    /// refuse to run under a different list.
    pub fn sha256(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("version {}\n", self.version));
        for p in &self.patterns {
            h.update(p.text.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}
