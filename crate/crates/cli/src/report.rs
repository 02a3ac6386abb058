use clap::ValueEnum;

use dynamize::engine::PropagationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

/// Prints named fields as `name value` pairs or as a CSV header and row.
pub fn fields(format: Format, fields: &[(&str, String)]) {
    match format {
        Format::Text => {
            let parts: Vec<String> = fields.iter().map(|(k, v)| format!("{k} {v}")).collect();
            println!("{}", parts.join(" "));
        }
        Format::Csv => {
            println!(
                "{}",
                fields.iter().map(|f| f.0).collect::<Vec<_>>().join(",")
            );
            println!(
                "{}",
                fields
                    .iter()
                    .map(|f| f.1.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            );
        }
    }
}

pub fn propagation(format: Format, op: &str, k: usize, r: &PropagationReport) {
    fields(
        format,
        &[
            ("op", op.to_string()),
            ("k", k.to_string()),
            ("affected", r.affected_total().to_string()),
            ("affected_round0", r.affected_at(0).to_string()),
            (
                "rounds",
                r.executed_per_round
                    .len()
                    .max(r.killed_per_round.len())
                    .to_string(),
            ),
            ("touched", r.touched.len().to_string()),
        ],
    );
}

/// Prints `(label, answer)` rows.
pub fn answers(format: Format, rows: &[(String, String)]) {
    match format {
        Format::Text => {
            for (_, a) in rows {
                println!("{a}");
            }
        }
        Format::Csv => {
            println!("query,answer");
            for (q, a) in rows {
                println!("{q},{a}");
            }
        }
    }
}
