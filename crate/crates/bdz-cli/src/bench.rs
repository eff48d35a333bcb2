//! The `bench` subcommand: sample a source, compress, and report pointwise
//! redundancy as CSV (schema v1, see the README).

use std::path::PathBuf;

use bdz::source::{measure_redundancy, mix_seed, MarkovSource};

use crate::{read_file, AppError};

pub const CSV_HEADER: &str =
    "n,rep,codeword_bits,container_bits,log2_mu,redundancy,per_sample,theorem_budget";

fn parse_source(spec: &str) -> Result<(MarkovSource, Option<u64>), AppError> {
    if let Some(path) = spec.strip_prefix("file:") {
        let text = read_file(&PathBuf::from(path))?;
        let text = String::from_utf8(text)
            .map_err(|_| AppError::Usage(format!("{path}: config is not UTF-8")))?;
        let (src, seed) = MarkovSource::from_config(&text)?;
        Ok((src, seed))
    } else {
        let src = MarkovSource::parse_preset(spec)?;
        Ok((src, None))
    }
}

pub fn run(
    source: &str,
    lengths: &[u64],
    reps: u64,
    cli_seed: Option<u64>,
    csv: Option<&PathBuf>,
) -> Result<(), AppError> {
    let (src, config_seed) = parse_source(source)?;
    if lengths.is_empty() || lengths.iter().any(|&n| n == 0) {
        return Err(AppError::Usage("lengths must be positive".into()));
    }
    if reps == 0 {
        return Err(AppError::Usage("reps must be at least 1".into()));
    }
    let seed = cli_seed.or(config_seed).unwrap_or(0);

    let mut out = String::with_capacity(64 * lengths.len() * reps as usize);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for &n in lengths {
        for rep in 0..reps {
            let x = src.sample(n as usize, mix_seed(seed, n, rep));
            let rec = measure_redundancy(&src, &x)?;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                rec.n,
                rep,
                rec.codeword_bits,
                rec.container_bits,
                rec.log2_mu,
                rec.redundancy,
                rec.per_sample,
                rec.theorem_budget
            ));
        }
    }

    match csv {
        Some(path) => {
            crate::write_file(path, out.as_bytes())?;
            eprintln!(
                "wrote {} rows to {}",
                lengths.len() as u64 * reps,
                path.display()
            );
        }
        None => print!("{out}"),
    }
    Ok(())
}
