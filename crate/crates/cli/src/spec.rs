//! State sources given on the command line.

use std::fs;
use std::path::Path;

use sdiv_core::states::{bloch_pure, random_state};
use sdiv_core::{DensityMatrix, Error, NumericPolicy, Result};

/// Builds a state from `diag:p1,p2,...`, `pure:theta[,phi]`,
/// `random:dim[:rank]` or a path to a state JSON file.
pub fn generate_state(spec: &str, seed: u64, policy: &NumericPolicy) -> Result<DensityMatrix> {
    let Some((kind, args)) = spec.split_once(':') else {
        return from_file(Path::new(spec), policy);
    };
    match kind {
        "diag" => {
            let probs = numbers(args)?;
            DensityMatrix::from_diagonal(&probs)
        }
        "pure" => match numbers(args)?.as_slice() {
            [theta] => bloch_pure(*theta, 0.0),
            [theta, phi] => bloch_pure(*theta, *phi),
            _ => Err(malformed(spec, "pure takes theta[,phi]")),
        },
        "random" => {
            let parts = args
                .split(':')
                .map(|x| x.trim().parse::<usize>().map_err(|_| malformed(spec, "random takes dim[:rank]")))
                .collect::<Result<Vec<_>>>()?;
            match parts.as_slice() {
                [dim] => random_state(*dim, None, seed),
                [dim, rank] => random_state(*dim, Some(*rank), seed),
                _ => Err(malformed(spec, "random takes dim[:rank]")),
            }
        }
        // Windows-style paths such as C:\state.json
        _ if Path::new(spec).exists() => from_file(Path::new(spec), policy),
        _ => Err(malformed(spec, "expected diag:, pure:, random: or a file path")),
    }
}

fn from_file(path: &Path, policy: &NumericPolicy) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    sdiv_core::io::state_from_json(&text, policy)
}

fn numbers(args: &str) -> Result<Vec<f64>> {
    args.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {x:?}"))))
        .collect()
}

fn malformed(spec: &str, hint: &str) -> Error {
    Error::Parse(format!("state spec {spec:?}: {hint}"))
}
