//! Annotated method-pair fixtures.
//!
//! A fixture file starts with `// expect: Type@side:line ...` (or
//! `// expect: none`), followed by `=== pre` and `=== post` sections.
//! Lines are relative to the first line of each section.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Expectation {
    pub kind: String,
    pub side: String,
    pub line: u32,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}:{}", self.kind, self.side, self.line)
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub path: PathBuf,
    pub expect: Vec<Expectation>,
    pub pre: String,
    pub post: String,
}

impl Fixture {
    pub fn is_negative(&self) -> bool {
        self.expect.is_empty()
    }
}

fn bad(path: &Path, msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("{}: {msg}", path.display()))
}

fn parse_expectation(path: &Path, token: &str) -> io::Result<Expectation> {
    let (kind, rest) = token.split_once('@').ok_or_else(|| bad(path, "missing @"))?;
    let (side, line) = rest.split_once(':').ok_or_else(|| bad(path, "missing :"))?;
    if side != "pre" && side != "post" {
        return Err(bad(path, "side must be pre or post"));
    }
    let line = line.parse().map_err(|_| bad(path, "bad line number"))?;
    Ok(Expectation { kind: kind.to_string(), side: side.to_string(), line })
}

pub fn parse_fixture(path: &Path, text: &str) -> io::Result<Fixture> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let spec = header.strip_prefix("// expect:").ok_or_else(|| bad(path, "missing expect header"))?;
    let mut expect = Vec::new();
    for token in spec.split_whitespace() {
        if token != "none" {
            expect.push(parse_expectation(path, token)?);
        }
    }
    expect.sort();
    let (mut pre, mut post) = (String::new(), String::new());
    let mut section = None;
    for line in lines {
        match line {
            "=== pre" => section = Some(0),
            "=== post" => section = Some(1),
            _ => {
                let buf = match section {
                    Some(0) => &mut pre,
                    Some(_) => &mut post,
                    None => return Err(bad(path, "text before the pre section")),
                };
                buf.push_str(line);
                buf.push('\n');
            }
        }
    }
    if pre.is_empty() || post.is_empty() {
        return Err(bad(path, "pre and post sections are required"));
    }
    let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    Ok(Fixture { name, path: path.to_path_buf(), expect, pre, post })
}

/// All `*.fixture` files in `dir`, sorted by name.
pub fn load_dir(dir: &Path) -> io::Result<Vec<Fixture>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "fixture"))
        .collect();
    paths.sort();
    paths.iter().map(|p| parse_fixture(p, &fs::read_to_string(p)?)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_and_sections() {
        let f = parse_fixture(
            Path::new("x.fixture"),
            "// expect: B@post:3 A@pre:2\n=== pre\nvoid f() {}\n=== post\nvoid g() {}\n",
        )
        .unwrap();
        assert_eq!(f.expect.len(), 2);
        assert_eq!(f.expect[0].to_string(), "A@pre:2");
        assert_eq!(f.pre, "void f() {}\n");
        assert_eq!(f.post, "void g() {}\n");
        let n = parse_fixture(Path::new("n.fixture"), "// expect: none\n=== pre\na\n=== post\nb\n").unwrap();
        assert!(n.is_negative());
        assert!(parse_fixture(Path::new("y"), "=== pre\na\n").is_err());
    }
}
