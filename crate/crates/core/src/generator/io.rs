//! Line-oriented instance format.
//!
//! ```text
//! HEADER
//! version 1
//! rng chacha8
//! seed 7
//! spec Data2-15-5-0.8-50-80-20
//! DIMS 15 2 5
//! H          n values
//! MINLOT     n values
//! D          n lines of p
//! T          m lines of p
//! ELIG       n lines of m (0/1)
//! Q          optional, n*m lines of p (item-major)
//! F          optional, n*m lines of p (item-major); all ones when absent
//! B          m blocks of n lines of n
//! C          m blocks of n lines of n
//! SHORTCUT   optional, m lines of one-based items, `-` for none
//! END
//! ```
//!
//! Values are written as integers when integral and otherwise in the
//! shortest form that parses back to the same `f64`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceMeta};

pub const FORMAT_VERSION: u32 = 1;
pub const RNG_NAME: &str = "chacha8";

fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn line(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(num).collect::<Vec<_>>().join(" ")
}

pub fn format_instance(inst: &Instance) -> String {
    let mut out = Vec::new();
    out.push("HEADER".to_string());
    out.push(format!("version {FORMAT_VERSION}"));
    out.push(format!("rng {RNG_NAME}"));
    if let Some(seed) = inst.meta.seed {
        out.push(format!("seed {seed}"));
    }
    if let Some(spec) = &inst.meta.spec {
        out.push(format!("spec {spec}"));
    }
    out.push(format!("DIMS {} {} {}", inst.n, inst.m, inst.p));
    out.push("H".into());
    out.push(line(inst.holding.iter().copied()));
    out.push("MINLOT".into());
    out.push(line(inst.min_lot.iter().copied()));
    out.push("D".into());
    out.extend(inst.demand.iter().map(|r| line(r.iter().copied())));
    out.push("T".into());
    out.extend(inst.capacity.iter().map(|r| line(r.iter().copied())));
    out.push("ELIG".into());
    out.extend(
        inst.eligible
            .iter()
            .map(|r| line(r.iter().map(|&e| if e { 1.0 } else { 0.0 }))),
    );
    if let Some(q) = &inst.setup_cap {
        out.push("Q".into());
        for per_item in q {
            out.extend(
                per_item
                    .iter()
                    .map(|r| line(r.iter().map(|&v| f64::from(v)))),
            );
        }
    }
    if inst.proc_time.iter().flatten().flatten().any(|&f| f != 1.0) {
        out.push("F".into());
        for per_item in &inst.proc_time {
            out.extend(per_item.iter().map(|r| line(r.iter().copied())));
        }
    }
    for (name, blocks) in [("B", &inst.setup_time), ("C", &inst.setup_cost)] {
        out.push(name.into());
        for block in blocks {
            out.extend(block.iter().map(|r| line(r.iter().copied())));
        }
    }
    if let Some(sc) = &inst.shortcut {
        out.push("SHORTCUT".into());
        for items in sc {
            if items.is_empty() {
                out.push("-".into());
            } else {
                out.push(line(items.iter().map(|&i| (i + 1) as f64)));
            }
        }
    }
    out.push("END".into());
    let mut text = out.join("\n");
    text.push('\n');
    text
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, format_instance(inst)).map_err(|e| Error::io(path, e))
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text, &path.display().to_string())
}

struct Lines<'a> {
    origin: &'a str,
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, origin: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Lines {
            origin,
            lines,
            pos: 0,
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.to_string(),
            line,
            message: message.into(),
        }
    }

    fn last_line(&self) -> usize {
        self.lines.last().map_or(0, |l| l.0)
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.lines.get(self.pos) {
            Some(&l) => {
                self.pos += 1;
                Ok(l)
            }
            None => Err(self.err(
                self.last_line(),
                format!("unexpected end of file in {what}"),
            )),
        }
    }

    fn section(&mut self, name: &str) -> Result<()> {
        match self.peek() {
            Some((_, l)) if l == name => {
                self.pos += 1;
                Ok(())
            }
            Some((no, l)) => Err(self.err(no, format!("expected section {name}, found `{l}`"))),
            None => Err(self.err(self.last_line(), format!("missing section {name}"))),
        }
    }

    fn at_section(&self, name: &str) -> bool {
        self.peek().is_some_and(|(_, l)| l == name)
    }

    fn row(&mut self, what: &str, len: usize) -> Result<Vec<f64>> {
        let (no, l) = self.next(what)?;
        let vals: Vec<f64> = l
            .split_whitespace()
            .enumerate()
            .map(|(idx, tok)| {
                tok.parse::<f64>().map_err(|_| {
                    self.err(
                        no,
                        format!("{what}: field {} `{tok}` is not a number", idx + 1),
                    )
                })
            })
            .collect::<Result<_>>()?;
        if vals.len() != len {
            return Err(self.err(
                no,
                format!("{what}: expected {len} values, found {}", vals.len()),
            ));
        }
        Ok(vals)
    }

    fn matrix(&mut self, what: &str, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>> {
        (0..rows).map(|_| self.row(what, cols)).collect()
    }
}

fn to_u32(lines: &Lines<'_>, v: f64, what: &str) -> Result<u32> {
    if v.fract() != 0.0 || v < 0.0 || v > f64::from(u32::MAX) {
        return Err(lines.err(0, format!("{what}: `{v}` is not a non-negative integer")));
    }
    Ok(v as u32)
}

pub fn parse_instance(text: &str, origin: &str) -> Result<Instance> {
    let mut lines = Lines::new(text, origin);
    lines.section("HEADER")?;
    let mut meta = InstanceMeta::default();
    let mut version = None;
    while let Some((no, l)) = lines.peek() {
        if l.starts_with("DIMS") {
            break;
        }
        lines.pos += 1;
        let (key, value) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let value = value.trim();
        match key {
            "version" => {
                let v: u32 = value
                    .parse()
                    .map_err(|_| lines.err(no, format!("HEADER: bad version `{value}`")))?;
                if v != FORMAT_VERSION {
                    return Err(lines.err(no, format!("HEADER: unsupported version {v}")));
                }
                version = Some(v);
            }
            "rng" => {
                if value != RNG_NAME {
                    return Err(lines.err(no, format!("HEADER: unknown rng `{value}`")));
                }
            }
            "seed" => {
                meta.seed = Some(
                    value
                        .parse()
                        .map_err(|_| lines.err(no, format!("HEADER: bad seed `{value}`")))?,
                );
            }
            "spec" => meta.spec = Some(value.to_string()),
            other => return Err(lines.err(no, format!("HEADER: unknown field `{other}`"))),
        }
    }
    if version.is_none() {
        return Err(lines.err(1, "HEADER: missing field version"));
    }
    let (no, dims) = match lines.peek() {
        Some(l) => l,
        None => return Err(lines.err(lines.last_line(), "missing section DIMS")),
    };
    lines.pos += 1;
    let d: Vec<usize> = dims
        .split_whitespace()
        .skip(1)
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| lines.err(no, "DIMS: expected three non-negative integers"))?;
    if d.len() != 3 {
        return Err(lines.err(no, "DIMS: expected `DIMS n m p`"));
    }
    let (n, m, p) = (d[0], d[1], d[2]);
    let mut inst = Instance::blank(n, m, p);
    inst.meta = meta;

    lines.section("H")?;
    inst.holding = lines.row("H", n)?;
    lines.section("MINLOT")?;
    inst.min_lot = lines.row("MINLOT", n)?;
    lines.section("D")?;
    inst.demand = lines.matrix("D", n, p)?;
    lines.section("T")?;
    inst.capacity = lines.matrix("T", m, p)?;
    lines.section("ELIG")?;
    let mut elig = Vec::with_capacity(n);
    for _ in 0..n {
        let (no, _) = lines.peek().unwrap_or((lines.last_line(), ""));
        let row = lines.row("ELIG", m)?;
        if row.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(lines.err(no, "ELIG: entries must be 0 or 1"));
        }
        elig.push(row.into_iter().map(|v| v == 1.0).collect());
    }
    inst.eligible = elig;
    if lines.at_section("Q") {
        lines.section("Q")?;
        let mut q = Vec::with_capacity(n);
        for _ in 0..n {
            let mut per_item = Vec::with_capacity(m);
            for _ in 0..m {
                let row = lines.row("Q", p)?;
                per_item.push(
                    row.into_iter()
                        .map(|v| to_u32(&lines, v, "Q"))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            q.push(per_item);
        }
        inst.setup_cap = Some(q);
    }
    if lines.at_section("F") {
        lines.section("F")?;
        let mut f = Vec::with_capacity(n);
        for _ in 0..n {
            f.push(lines.matrix("F", m, p)?);
        }
        inst.proc_time = f;
    }
    lines.section("B")?;
    inst.setup_time = (0..m)
        .map(|_| lines.matrix("B", n, n))
        .collect::<Result<_>>()?;
    lines.section("C")?;
    inst.setup_cost = (0..m)
        .map(|_| lines.matrix("C", n, n))
        .collect::<Result<_>>()?;
    if lines.at_section("SHORTCUT") {
        lines.section("SHORTCUT")?;
        let mut sc = Vec::with_capacity(m);
        for _ in 0..m {
            let (no, l) = lines.next("SHORTCUT")?;
            if l == "-" {
                sc.push(Vec::new());
                continue;
            }
            let items = l
                .split_whitespace()
                .map(|tok| match tok.parse::<usize>() {
                    Ok(v) if v >= 1 && v <= n => Ok(v - 1),
                    _ => Err(lines.err(no, format!("SHORTCUT: bad item `{tok}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            sc.push(items);
        }
        inst.shortcut = Some(sc);
    }
    lines.section("END")?;
    if let Some((no, l)) = lines.peek() {
        return Err(lines.err(no, format!("trailing content `{l}`")));
    }
    inst.validate().map_err(|e| lines.err(0, e.to_string()))?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{catalog_class, generate};

    #[test]
    fn round_trip_generated() {
        for (name, seed) in [("Data2-15-5-0.8-50-80-20", 3), ("Data1-15-10-0.6-100", 9)] {
            let inst = generate(&catalog_class(name).unwrap(), seed).unwrap();
            let text = format_instance(&inst);
            assert_eq!(parse_instance(&text, "mem").unwrap(), inst);
        }
    }

    #[test]
    fn awkward_floats_round_trip() {
        let mut inst = Instance::blank(1, 1, 1);
        inst.capacity[0][0] = 0.1 + 0.2;
        inst.demand[0][0] = 1e-7;
        inst.holding[0] = 123456.789;
        let back = parse_instance(&format_instance(&inst), "mem").unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn truncated_file_names_missing_section() {
        let inst = generate(&catalog_class("Data2-15-5-0.8-50-80-20").unwrap(), 1).unwrap();
        let text = format_instance(&inst);
        let cut = &text[..text.find("\nC\n").unwrap() + 1];
        let err = parse_instance(cut, "mem").unwrap_err().to_string();
        assert!(err.contains("missing section C"), "{err}");
    }

    #[test]
    fn bad_field_reports_line() {
        let inst = Instance::blank(2, 1, 1);
        let text = format_instance(&inst).replace("MINLOT\n0 0", "MINLOT\n0 x");
        match parse_instance(&text, "mem").unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 8);
                assert!(message.contains("field 2"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn q_override_is_used() {
        let mut inst = Instance::blank(1, 1, 2);
        inst.capacity = vec![vec![100.0, 100.0]];
        let text = format_instance(&inst).replace("B\n", "Q\n2 3\nB\n");
        let back = parse_instance(&text, "mem").unwrap();
        assert_eq!(back.setup_cap(0, 0, 1), 3);
        assert_eq!(inst.setup_cap(0, 0, 1), 100);
    }
}
