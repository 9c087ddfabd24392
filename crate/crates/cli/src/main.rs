mod args;
mod render;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;

use args::{
    Cli, Command, Format, ImprovedArgs, McArgs, NoiseArgs, OutputArgs, RecoverArgs, SweepArgs,
};
use cvdist::mcoracle::{validate_protocol, McValidation};
use cvdist::protocols::{
    geometric_grid, run_improved_protocol, run_recovery_protocol, sweep, ASYMPTOTIC_NU,
};
use cvdist::{Error, GainMatrix, NoiseSetting, ProtocolParams, Squeezing};
use render::TableRow;

const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 1;

const MC_CRITERION: &str =
    "every upper-triangle entry satisfies |estimate - reference| <= sigma * standard_error; \
     standard_error = 2 sd(v_j v_k) / sqrt(N)";

enum Failure {
    Core(Error),
    Io(std::io::Error),
    /// Output was produced but a check did not pass.
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

struct Rendered {
    body: String,
    pass: bool,
}

fn emit(out: &OutputArgs, r: Rendered) -> Result<(), Failure> {
    emit_to(out.output.as_deref(), r)
}

fn emit_to(path: Option<&std::path::Path>, r: Rendered) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, r.body.as_bytes())?,
        None => std::io::stdout().write_all(r.body.as_bytes())?,
    }
    if r.pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn params_from(sq: Squeezing, noise: &NoiseArgs) -> Result<ProtocolParams, Error> {
    ProtocolParams::new(sq, noise.x, noise.excess)
}

fn cmd_improved(a: &ImprovedArgs) -> Result<(), Failure> {
    let p = params_from(a.squeezing.squeezing(), &a.noise)?;
    let mut report = run_improved_protocol(&p)?;
    if let Some(g) = &a.gain {
        report = report.with_recovery(run_recovery_protocol(&p, g)?);
    }
    let body = match a.output.format {
        Format::Json => render::json(&report),
        Format::Csv => render::csv_rows(&[render::sweep_row(&report)]),
        Format::Text => render::improved_text(&report),
    };
    emit(&a.output, Rendered { body, pass: true })
}

fn cmd_recover(a: &RecoverArgs) -> Result<(), Failure> {
    let p = params_from(a.squeezing.squeezing(), &a.noise)?;
    let r = run_recovery_protocol(&p, &a.gain)?;
    let body = match a.output.format {
        Format::Json => render::json(&r),
        Format::Csv => render::csv_rows(&[render::RecoveryRow::from(&r)]),
        Format::Text => render::recovery_text(&r),
    };
    emit(&a.output, Rendered { body, pass: true })
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Failure> {
    let grid = if a.e2t.is_empty() {
        geometric_grid(a.start, a.stop, a.points)?
    } else {
        a.e2t.clone()
    };
    let table = sweep(&grid, a.noise.x, a.noise.excess)?;
    let body = match a.format {
        Format::Json => render::json(&table),
        Format::Csv => render::csv_rows(&table.rows),
        Format::Text => render::sweep_text(&table),
    };
    emit_to(a.output.as_deref(), Rendered { body, pass: true })
}

#[derive(Serialize)]
struct McOutput<'a> {
    criterion: &'static str,
    sigma_multiplier: f64,
    pass: bool,
    #[serde(flatten)]
    validation: &'a McValidation,
}

fn cmd_mc_validate(a: &McArgs) -> Result<(), Failure> {
    let p = params_from(a.squeezing.squeezing(), &a.noise)?;
    let v = validate_protocol(&p, &a.gain, a.samples, a.seed, a.sigma)?;
    let body = match a.output.format {
        Format::Json => render::json(&McOutput {
            criterion: MC_CRITERION,
            sigma_multiplier: a.sigma,
            pass: v.pass,
            validation: &v,
        }),
        Format::Csv => render::csv_rows(&render::mc_rows(&v)),
        Format::Text => render::mc_text(&v, MC_CRITERION),
    };
    emit(&a.output, Rendered { body, pass: v.pass })
}

fn table_row(
    row: &'static str,
    quantity: &'static str,
    expected: f64,
    computed: f64,
    tolerance: f64,
) -> TableRow {
    TableRow {
        row,
        quantity,
        expected,
        computed,
        tolerance,
        pass: (computed - expected).abs() <= tolerance,
    }
}

fn paper_rows() -> Result<Vec<TableRow>, Error> {
    let at = |e2t: f64| Squeezing::from_e2t(e2t).map(ProtocolParams::at_threshold);
    let mut rows = Vec::new();

    let r2 = run_improved_protocol(&at(2.0)?)?;
    rows.push(table_row("e2t_2", "nu", 0.6589, r2.nu(), 5e-4));
    rows.push(table_row(
        "e2t_2",
        "log_negativity",
        0.6019,
        r2.log_negativity(),
        1e-3,
    ));

    let r10 = run_improved_protocol(&at(10.0)?)?;
    rows.push(table_row("e2t_10", "nu", 0.3968, r10.nu(), 5e-4));
    rows.push(table_row(
        "e2t_10",
        "log_negativity",
        1.3334,
        r10.log_negativity(),
        1e-3,
    ));

    let noisy = ProtocolParams::new(Squeezing::from_e2t(2.0)?, NoiseSetting::Auto, 200.0)?;
    let rn = run_improved_protocol(&noisy)?;
    rows.push(table_row(
        "excess_200",
        "log_negativity",
        0.5851,
        rn.log_negativity(),
        1e-3,
    ));

    let ra = run_improved_protocol(&at(1e6)?)?;
    rows.push(table_row(
        "asymptote_1e6",
        "nu",
        ASYMPTOTIC_NU,
        ra.nu(),
        1e-3,
    ));
    rows.push(table_row(
        "asymptote_1e6",
        "log_negativity",
        1.585,
        ra.log_negativity(),
        2e-3,
    ));

    let p = at(2.0)?;
    let rec = run_recovery_protocol(&p, &GainMatrix::identity())?;
    rows.push(table_row("recovery_e2t_2", "nu_ac", 0.5, rec.nu_ac, 1e-12));
    rows.push(table_row(
        "recovery_e2t_2",
        "purity_det",
        2.25,
        rec.purity_det,
        1e-10,
    ));

    rows.push(table_row(
        "sigma_check",
        "sigma",
        1.0,
        r2.entanglement.sigma,
        1e-9,
    ));
    Ok(rows)
}

fn cmd_paper_table(out: &OutputArgs) -> Result<(), Failure> {
    let rows = paper_rows()?;
    let pass = rows.iter().all(|r| r.pass);
    let body = match out.format {
        Format::Json => render::json(&rows),
        Format::Csv => render::csv_rows(&rows),
        Format::Text => render::table_text(&rows),
    };
    emit(out, Rendered { body, pass })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match &cli.command {
        Command::Improved(a) => cmd_improved(a),
        Command::Recover(a) => cmd_recover(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::McValidate(a) => cmd_mc_validate(a),
        Command::PaperTable(a) => cmd_paper_table(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) => ExitCode::from(EXIT_USAGE),
                Error::NumericalFailure(_) | Error::ConsistencyFailure(_) => {
                    ExitCode::from(EXIT_CHECK_FAILED)
                }
            }
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}
