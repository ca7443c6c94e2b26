//! Edge-list ingestion and plan files.
//!
//! Edge lists are whitespace-separated id pairs, one edge per line. Lines
//! starting with `%` (KONECT) or `#` (SNAP) are comments, and columns after
//! the second (weights, timestamps) are ignored.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::GccCurve;
use crate::graph::{Edge, Graph};
use crate::plan::{Provenance, RemovalPlan};

/// What the loader had to clean up.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    /// Non-comment, non-blank lines read.
    pub raw_lines: usize,
    pub dropped_loops: usize,
    /// Repeated pairs, in either direction.
    pub collapsed_duplicates: usize,
    pub nodes: usize,
    pub edges: usize,
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(Graph, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    read_edge_list(BufReader::new(file), path)
}

/// Parses an edge list from any reader; `path` is only used in messages.
///
/// Node ids become dense indices in sorted order of the original ids
/// (numeric order when every id is an integer), and the ids are kept as
/// labels.
pub fn read_edge_list<R: Read>(reader: R, path: &Path) -> Result<(Graph, LoadReport)> {
    let mut report = LoadReport::default();
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        report.raw_lines += 1;
        let mut fields = trimmed.split_whitespace();
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("expected two node ids, got `{trimmed}`"),
            });
        };
        if a == b {
            report.dropped_loops += 1;
            continue;
        }
        pairs.push((a.to_string(), b.to_string()));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyGraph(path.to_path_buf()));
    }

    let mut labels: Vec<&str> = pairs
        .iter()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    let numeric: Option<Vec<i128>> = labels.iter().map(|s| s.parse().ok()).collect();
    match numeric {
        Some(_) => labels.sort_by_key(|s| s.parse::<i128>().unwrap()),
        None => labels.sort_unstable(),
    }
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    let mut seen = HashSet::with_capacity(pairs.len());
    let mut edges = Vec::with_capacity(pairs.len());
    for (a, b) in &pairs {
        let e = Edge::new(index[a.as_str()], index[b.as_str()]);
        if seen.insert(e) {
            edges.push((e.u, e.v));
        } else {
            report.collapsed_duplicates += 1;
        }
    }
    let owned = labels.iter().map(|s| s.to_string()).collect();
    let g = Graph::from_edges(labels.len(), edges)?.with_labels(owned);
    report.nodes = g.n();
    report.edges = g.m();
    if report.dropped_loops > 0 || report.collapsed_duplicates > 0 {
        log::warn!(
            "{}: dropped {} self-loops, collapsed {} duplicate edges",
            path.display(),
            report.dropped_loops,
            report.collapsed_duplicates
        );
    }
    Ok((g, report))
}

/// Writes one `u v` line per edge using node labels. Isolated nodes are not
/// representable and are lost.
pub fn write_edge_list<W: Write>(g: &Graph, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "% {} nodes, {} edges", g.n(), g.m())?;
    for e in g.edges() {
        writeln!(w, "{} {}", g.label(e.u), g.label(e.v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    write_edge_list(g, create(path.as_ref())?)
}

pub const PLAN_HEADER: &str = "batch_index,provenance,edge_u,edge_v";

/// One row per removed edge, endpoints as dense node indices. A batch
/// without edges (a node that was already isolated) is a single row with
/// both endpoint columns empty, so batch numbering survives a round trip.
pub fn write_plan_csv<W: Write>(plan: &RemovalPlan, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "# total_edges={}", plan.total_edges)?;
    writeln!(w, "{PLAN_HEADER}")?;
    for (i, batch) in plan.batches.iter().enumerate() {
        if batch.edges.is_empty() {
            writeln!(w, "{i},{},,", batch.provenance)?;
        }
        for e in &batch.edges {
            writeln!(w, "{i},{},{},{}", batch.provenance, e.u, e.v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_plan(plan: &RemovalPlan, path: impl AsRef<Path>) -> Result<()> {
    write_plan_csv(plan, create(path.as_ref())?)
}

/// Reads a plan written by [`write_plan_csv`]. When the `total_edges`
/// comment is missing, `g_edges` is used.
pub fn read_plan_csv<R: Read>(reader: R, path: &Path, g_edges: usize) -> Result<RemovalPlan> {
    let mut plan = RemovalPlan::new(g_edges);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut header_seen = false;
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(t) = comment.trim().strip_prefix("total_edges=") {
                plan.total_edges = t.parse().map_err(|_| parse_err(lineno, format!("bad edge count `{t}`")))?;
            }
            continue;
        }
        if !header_seen {
            if line != PLAN_HEADER {
                return Err(parse_err(lineno, format!("expected header `{PLAN_HEADER}`")));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(parse_err(lineno, format!("expected 4 columns, got {}", cols.len())));
        }
        let index: usize = cols[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad batch index `{}`", cols[0])))?;
        let provenance: Provenance = cols[1].parse().map_err(|m| parse_err(lineno, m))?;
        if index == plan.len() {
            plan.push(Vec::new(), provenance);
        } else if index + 1 != plan.len() {
            return Err(parse_err(lineno, format!("batch {index} out of order")));
        }
        if cols[2].is_empty() && cols[3].is_empty() {
            continue;
        }
        let node = |s: &str| s.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad node index `{s}`")));
        let (u, v) = (node(cols[2])?, node(cols[3])?);
        if u == v {
            return Err(parse_err(lineno, "self-loop in plan".into()));
        }
        plan.batches.last_mut().unwrap().edges.push(Edge::new(u, v));
    }
    Ok(plan)
}

pub fn load_plan(path: impl AsRef<Path>, g_edges: usize) -> Result<RemovalPlan> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    read_plan_csv(file, path, g_edges)
}

/// Reads a curve CSV as written by [`GccCurve::write_csv`] (`x,f`) or by
/// the averaged form (`x,f_mean,f_std`); only the first two columns are used.
pub fn read_curve_csv<R: Read>(reader: R, path: &Path) -> Result<GccCurve> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut breakpoints: Vec<(f64, f64)> = Vec::new();
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') || (lineno == 1 && line.starts_with('x')) {
            continue;
        }
        let mut cols = line.split(',');
        let mut number = |what: &str| -> Result<f64> {
            let s = cols.next().unwrap_or("").trim();
            s.parse().map_err(|_| parse_err(lineno, format!("bad {what} `{s}`")))
        };
        let (x, f) = (number("cost")?, number("GCC fraction")?);
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&f) {
            return Err(parse_err(lineno, format!("point ({x}, {f}) outside the unit square")));
        }
        if breakpoints.last().is_some_and(|&(px, _)| x <= px) {
            return Err(parse_err(lineno, "costs must increase".into()));
        }
        if breakpoints.is_empty() && x != 0.0 {
            return Err(parse_err(lineno, "curve must start at cost 0".into()));
        }
        breakpoints.push((x, f));
    }
    if breakpoints.is_empty() {
        return Err(parse_err(0, "curve has no points".into()));
    }
    Ok(GccCurve { breakpoints })
}

pub fn load_curve(path: impl AsRef<Path>) -> Result<GccCurve> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    read_curve_csv(file, path)
}

pub(crate) fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::from(e).context(dir.display().to_string()))?;
    }
    File::create(path).map_err(|e| Error::from(e).context(display(path)))
}

fn display(path: &Path) -> String {
    PathBuf::from(path).display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::Provenance;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<(Graph, LoadReport)> {
        read_edge_list(text.as_bytes(), Path::new("mem"))
    }

    #[test]
    fn triangle_with_comment() {
        let (g, report) = parse("1 2\n2 3\n# c\n3 1\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 3));
        assert_eq!(report.raw_lines, 3);
        assert_eq!(g.labels().unwrap(), ["1", "2", "3"]);
    }

    #[test]
    fn loops_and_duplicates_are_counted() {
        let (g, report) = parse("% konect header\n5 5\n1 5\n5 1\n1 5 0.3 1990\n").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
        assert_eq!(report.dropped_loops, 1);
        assert_eq!(report.collapsed_duplicates, 2);
    }

    #[test]
    fn numeric_ids_sort_numerically() {
        let (g, _) = parse("10 9\n9 100\n").unwrap();
        assert_eq!(g.labels().unwrap(), ["9", "10", "100"]);
        assert!(g.has_edge(Edge::new(0, 1)));
        assert!(g.has_edge(Edge::new(0, 2)));
    }

    #[test]
    fn string_ids() {
        let (g, _) = parse("bob alice\nalice carol\n").unwrap();
        assert_eq!(g.labels().unwrap(), ["alice", "bob", "carol"]);
        assert_eq!(g.degree(0), 2);
    }

    #[test]
    fn parse_error_has_line_number() {
        match parse("1 2\n\n3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(parse("# nothing\n"), Err(Error::EmptyGraph(_))));
        assert!(matches!(parse("4 4\n"), Err(Error::EmptyGraph(_))));
    }

    #[test]
    fn plan_round_trip_keeps_empty_batches() {
        let mut plan = RemovalPlan::new(3);
        plan.push(vec![Edge::new(0, 1), Edge::new(1, 2)], Provenance::Node(1));
        plan.push(vec![], Provenance::Node(0));
        plan.push(vec![Edge::new(2, 3)], Provenance::Random);
        let mut buf = Vec::new();
        write_plan_csv(&plan, &mut buf).unwrap();
        let back = read_plan_csv(buf.as_slice(), Path::new("mem"), 0).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn plan_reader_rejects_garbage() {
        let bad = format!("{PLAN_HEADER}\n0,edge,1\n");
        assert!(read_plan_csv(bad.as_bytes(), Path::new("mem"), 1).is_err());
        let bad = format!("{PLAN_HEADER}\n1,edge,0,1\n");
        assert!(read_plan_csv(bad.as_bytes(), Path::new("mem"), 1).is_err());
        assert!(read_plan_csv("x,y\n".as_bytes(), Path::new("mem"), 1).is_err());
    }

    #[test]
    fn curve_csv_round_trip() {
        let curve = GccCurve {
            breakpoints: vec![(0.0, 1.0), (0.25, 0.5), (0.5, 0.125)],
        };
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        assert_eq!(read_curve_csv(buf.as_slice(), Path::new("mem")).unwrap(), curve);
        let averaged = "x,f_mean,f_std\n0,1,0\n0.5,0.5,0.1\n";
        let c = read_curve_csv(averaged.as_bytes(), Path::new("mem")).unwrap();
        assert_eq!(c.breakpoints, vec![(0.0, 1.0), (0.5, 0.5)]);
        assert!(read_curve_csv("x,f\n0,1\n0,0.5\n".as_bytes(), Path::new("mem")).is_err());
        assert!(read_curve_csv("x,f\n0.1,1\n".as_bytes(), Path::new("mem")).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = crate::generators::gen_er(50, 4.0, 3).unwrap().extract_gcc();
        let path = dir.path().join("sub/g.txt");
        save_edge_list(&g, &path).unwrap();
        let (back, _) = load_edge_list(&path).unwrap();
        assert_eq!(back.edges(), g.edges());
    }

    proptest! {
        #[test]
        fn edge_list_round_trip(pairs in prop::collection::vec((0usize..30, 0usize..30), 1..80)) {
            let n = 30;
            let g = Graph::from_edges(n, pairs).unwrap();
            prop_assume!(g.m() > 0);
            let mut buf = Vec::new();
            write_edge_list(&g, &mut buf).unwrap();
            let (back, _) = read_edge_list(buf.as_slice(), Path::new("mem")).unwrap();
            // Isolated nodes vanish; surviving ids keep their relative order.
            let kept: Vec<usize> = (0..n).filter(|&v| g.degree(v) > 0).collect();
            let relabeled: Vec<Edge> = back
                .edges()
                .into_iter()
                .map(|e| Edge::new(kept[e.u], kept[e.v]))
                .collect();
            prop_assert_eq!(relabeled, g.edges());
        }
    }
}
