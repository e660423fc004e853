//! Builder names for graphs and complexes: `name` or `name:a,b`, or
//! `file:<path>` for the text formats of the library.

use crate::error::{io_error, CliError, CliResult};
use couplings::coupling::two_triangles;
use couplings::gauge::CubicalComplex;
use couplings::graph::{read_graph_file, Graph};
use couplings::measures::SubgraphFamily;

fn bad(key: &str, spec: &str, reason: impl Into<String>) -> CliError {
    CliError::BadValue { key: key.into(), value: spec.into(), reason: reason.into() }
}

fn dims(key: &str, spec: &str, args: Option<&str>, want: usize) -> CliResult<Vec<usize>> {
    let nums: Vec<usize> = args
        .unwrap_or("")
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(|e| bad(key, spec, e.to_string())))
        .collect::<CliResult<_>>()?;
    if nums.len() != want || nums.contains(&0) {
        return Err(bad(key, spec, format!("expected {want} positive integer argument(s)")));
    }
    Ok(nums)
}

pub fn graph_from_spec(spec: &str) -> CliResult<Graph> {
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let d = |want| dims("graph", spec, args, want);
    Ok(match name {
        "file" => read_graph_file(args.unwrap_or(""))?,
        "single-edge" => Graph::single_edge(),
        "triangle" => Graph::triangle(),
        "theta" => Graph::theta(),
        "two-triangles" => two_triangles(),
        "path" => Graph::path(d(1)?[0]),
        "cycle" => {
            let n = d(1)?[0];
            if n < 2 {
                return Err(bad("graph", spec, "a cycle needs at least 2 vertices"));
            }
            Graph::cycle(n)
        }
        "complete" => Graph::complete(d(1)?[0]),
        "torus" => {
            let v = d(2)?;
            Graph::torus(v[0], v[1])
        }
        "box" => {
            let v = d(2)?;
            Graph::box_lattice(v[0], v[1])
        }
        "grid" => {
            let v = d(2)?;
            Graph::grid(v[0], v[1])
        }
        "hex" => {
            let v = d(2)?;
            Graph::hex_patch(v[0], v[1])
        }
        _ => return Err(bad("graph", spec, "unknown builder")),
    })
}

pub fn complex_from_spec(spec: &str) -> CliResult<CubicalComplex> {
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    Ok(match name {
        "file" => {
            let path = args.unwrap_or("");
            CubicalComplex::parse(&std::fs::read_to_string(path).map_err(io_error(path))?)?
        }
        "square" => CubicalComplex::single_square(),
        "torus" => {
            let v = dims("complex", spec, args, 2)?;
            CubicalComplex::torus_complex(v[0], v[1])?
        }
        "box" => {
            let sides: Vec<usize> = args
                .unwrap_or("")
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|e| bad("complex", spec, e.to_string())))
                .collect::<CliResult<_>>()?;
            CubicalComplex::box_complex(&sides)?
        }
        _ => return Err(bad("complex", spec, "unknown builder")),
    })
}

pub fn family_from_name(name: &str) -> CliResult<SubgraphFamily> {
    [SubgraphFamily::All, SubgraphFamily::Forests, SubgraphFamily::Even, SubgraphFamily::Matchings]
        .into_iter()
        .find(|f| f.name() == name)
        .ok_or_else(|| bad("family", name, "expected all, forests, even or matchings"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders() {
        assert_eq!(graph_from_spec("triangle").unwrap().edge_count(), 3);
        assert_eq!(graph_from_spec("cycle:5").unwrap().edge_count(), 5);
        assert_eq!(graph_from_spec("torus:2,1").unwrap().edge_count(), 8);
        assert_eq!(graph_from_spec("grid:4,4").unwrap().edge_count(), 24);
        assert_eq!(complex_from_spec("square").unwrap().cell_count(2), 1);
        assert!(graph_from_spec("torus:2").is_err());
        assert!(graph_from_spec("petersen").is_err());
        assert!(family_from_name("trees").is_err());
    }
}
