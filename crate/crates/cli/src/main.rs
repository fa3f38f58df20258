//! `heh`: run λω programs, evaluate expressions, or start a REPL.

use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use heh_core::syntax::{parse_repl_line, Span};
use heh_core::{Error, EvalConfig, Handle, Session};

const REPL_FUEL: u64 = 10_000_000;

#[derive(Parser, Debug)]
#[command(name = "heh", version, about = "Interpreter for the transfinite array calculus λω")]
struct Cli {
    /// Program file to run. Without a file or `-e`, starts a REPL.
    file: Option<PathBuf>,

    /// Evaluate a program given on the command line.
    #[arg(short = 'e', long = "eval", value_name = "EXPR", conflicts_with = "file")]
    expr: Option<String>,

    /// Evaluate finite, non-recursive imaps eagerly.
    #[arg(long)]
    strict_arrays: bool,

    /// Do not memoize computed imap elements.
    #[arg(long)]
    no_memo: bool,

    /// Maximum number of rule applications per evaluation.
    #[arg(long, value_name = "N")]
    fuel: Option<u64>,

    /// Elements forced per infinite segment when printing lazy arrays.
    #[arg(long, value_name = "K", default_value_t = 10)]
    force_print: usize,

    /// Do not load the standard prelude.
    #[arg(long)]
    no_prelude: bool,

    /// Select this index (e.g. "[3,3]") from the result and print it.
    #[arg(long, value_name = "IDX")]
    probe: Option<String>,
}

impl Cli {
    fn config(&self, default_fuel: Option<u64>) -> EvalConfig {
        EvalConfig {
            strict_finite_imaps: self.strict_arrays,
            memoize: !self.no_memo,
            fuel: self.fuel.or(default_fuel),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let interactive = cli.file.is_none() && cli.expr.is_none();
    let config = cli.config(if interactive { Some(REPL_FUEL) } else { None });
    let mut session = if cli.no_prelude {
        Session::new(config)
    } else {
        match Session::with_prelude(config) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: failed to load prelude: {e}");
                return ExitCode::from(1);
            }
        }
    };
    if interactive {
        repl(&mut session, &cli);
        return ExitCode::SUCCESS;
    }
    let (name, src) = match (&cli.file, &cli.expr) {
        (_, Some(e)) => ("<expr>".to_string(), e.clone()),
        (Some(path), None) => match std::fs::read_to_string(path) {
            Ok(s) => (path.display().to_string(), s),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        (None, None) => unreachable!("handled above"),
    };
    let result = match session.run_source(&src) {
        Ok(r) => r,
        Err(e) => {
            report(&name, &src, &e);
            return ExitCode::from(1);
        }
    };
    let Some(h) = result else {
        if cli.probe.is_some() {
            eprintln!("error: program has no final expression to probe");
            return ExitCode::from(1);
        }
        return ExitCode::SUCCESS;
    };
    match show(&mut session, h, &cli) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err((code, e)) => {
            let probe = cli.probe.clone().unwrap_or_default();
            report("<probe>", &probe, &e);
            ExitCode::from(code)
        }
    }
}

/// Renders the result, or the probed element of it.
fn show(session: &mut Session, h: Handle, cli: &Cli) -> Result<String, (u8, Error)> {
    let target = match &cli.probe {
        Some(idx) => session.select_source(h, idx).map_err(|e| match e {
            Error::Syntax(_) => (2, e),
            e => (1, e),
        })?,
        None => h,
    };
    session
        .render(target, cli.force_print)
        .map_err(|e| (1, Error::Eval(e)))
}

fn repl(session: &mut Session, cli: &Cli) {
    let stdin = io::stdin();
    let prompt = stdin.is_terminal();
    let mut out = io::stdout();
    loop {
        if prompt {
            print!("> ");
            let _ = out.flush();
        }
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) | Err(_) => break,
            Ok(_) => {}
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(cmd) = line.strip_prefix(':') {
            let mut parts = cmd.splitn(2, char::is_whitespace);
            match (parts.next().unwrap_or(""), parts.next().map(str::trim)) {
                ("quit" | "q", _) => break,
                ("config", _) => {
                    let c = session.config();
                    println!(
                        "strict-arrays: {}\nmemoize: {}\nfuel: {}\nforce-print: {}",
                        c.strict_finite_imaps,
                        c.memoize,
                        c.fuel.map_or("unlimited".to_string(), |f| f.to_string()),
                        cli.force_print
                    );
                }
                ("load", Some(path)) => match std::fs::read_to_string(path) {
                    Ok(src) => match session.run_source(&src) {
                        Ok(Some(h)) => print_value(session, h, cli.force_print),
                        Ok(None) => {}
                        Err(e) => report(path, &src, &e),
                    },
                    Err(e) => eprintln!("error: cannot read {path}: {e}"),
                },
                _ => eprintln!("unknown command `:{cmd}` (try :quit, :config, :load FILE)"),
            }
            continue;
        }
        let item = match parse_repl_line(line) {
            Ok(i) => i,
            Err(e) => {
                report("<repl>", line, &Error::Syntax(e));
                continue;
            }
        };
        match session.run_item(&item) {
            Ok(Some(h)) => print_value(session, h, cli.force_print),
            Ok(None) => {}
            Err(e) => report("<repl>", line, &Error::Eval(e)),
        }
    }
}

fn print_value(session: &mut Session, h: Handle, k: usize) {
    match session.render(h, k) {
        Ok(s) => println!("{s}"),
        Err(e) => eprintln!("error: {e}"),
    }
}

/// Prints an error with the offending source line underlined.
fn report(name: &str, src: &str, e: &Error) {
    let msg = match e {
        Error::Syntax(e) => format!("syntax error: {e}"),
        Error::Eval(e) => format!("{}: {}", e.kind, e.message),
        Error::NoResult => e.to_string(),
    };
    eprintln!("error: {msg}");
    let Some(span) = e.span().filter(|s| s.line > 0) else {
        return;
    };
    if let Error::Eval(ev) = e {
        eprintln!("  rule: {}", ev.rule);
    }
    eprintln!("  --> {name}:{span}");
    if let Some(text) = src.lines().nth(span.line as usize - 1) {
        eprintln!("   | {text}");
        eprintln!("   | {}", underline(text, span));
    }
}

fn underline(line: &str, span: Span) -> String {
    let col = span.col.saturating_sub(1) as usize;
    let width = line.len().saturating_sub(col);
    let len = (span.end - span.start).clamp(1, width.max(1));
    format!("{}{}", " ".repeat(col), "^".repeat(len))
}
