//! Line-oriented text format for circuits.
//!
//! ```text
//! alpha 2
//! # comments run to the end of the line
//! prep a +          # +alpha; `-` is -alpha; otherwise RE or RE±IMi
//! prep b 0.5-1.25i
//! h a               # reference defaults to the declared alpha
//! h b ref 1.5
//! bs a b
//! split a c
//! select0 b
//! ```

use std::fmt;

use num_complex::Complex64;

use crate::engine::{is_valid_name, validate, Circuit, Instruction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {level}: {}",
            self.span.line, self.span.column, self.message
        )
    }
}

/// A successfully parsed circuit plus any warnings.
#[derive(Clone, Debug, PartialEq)]
pub struct Parsed {
    pub circuit: Circuit,
    pub warnings: Vec<ParseDiagnostic>,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in code
        .char_indices()
        .chain(std::iter::once((code.len(), ' ')))
    {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &code[s..i],
                    column: code[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    out
}

/// Finite real literal.
pub fn parse_real(s: &str) -> Option<f64> {
    // f64::from_str also takes "inf", "NaN" and a leading '+'
    if !s
        .bytes()
        .all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b))
    {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// `RE` or `RE+IMi` / `RE-IMi`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let Some(body) = s.strip_suffix('i') else {
        return parse_real(s).map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))?;
    let re = parse_real(&body[..split])?;
    let im = parse_real(&body[split..])?;
    Some(Complex64::new(re, im))
}

/// Shortest text that parses back to exactly `x`.
pub fn format_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn format_complex(z: Complex64) -> String {
    if z.im.to_bits() == 0 {
        return format_real(z.re);
    }
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", format_real(z.re), format_real(z.im.abs()))
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}

/// Canonical text for `c`: the header, then one instruction per line.
pub fn serialize(c: &Circuit) -> String {
    let alpha = c.declared_alpha;
    let mut out = format!("alpha {}\n", format_real(alpha));
    for ins in &c.instructions {
        let line = match ins {
            Instruction::Prep { mode, amplitude } => {
                let amp = if same(amplitude.re, alpha) && same(amplitude.im, 0.0) {
                    "+".to_string()
                } else if same(amplitude.re, -alpha) && same(amplitude.im, 0.0) {
                    "-".to_string()
                } else {
                    format_complex(*amplitude)
                };
                format!("prep {mode} {amp}")
            }
            Instruction::Hadamard { mode, alpha_ref } => {
                if same(*alpha_ref, alpha) {
                    format!("h {mode}")
                } else {
                    format!("h {mode} ref {}", format_real(*alpha_ref))
                }
            }
            Instruction::Bs { first, second } => format!("bs {first} {second}"),
            Instruction::Split { source, new_mode } => format!("split {source} {new_mode}"),
            Instruction::Select0 { mode } => format!("select0 {mode}"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

struct Parser {
    diags: Vec<ParseDiagnostic>,
}

impl Parser {
    fn report(&mut self, line: usize, column: usize, severity: Severity, message: String) {
        self.diags.push(ParseDiagnostic {
            span: SourceSpan { line, column },
            message,
            severity,
        });
    }

    fn error(&mut self, line: usize, column: usize, message: String) {
        self.report(line, column, Severity::Error, message);
    }

    fn name(&mut self, line: usize, tok: &Token) -> String {
        if !is_valid_name(tok.text) {
            self.error(
                line,
                tok.column,
                format!("invalid mode name `{}`", tok.text),
            );
        }
        tok.text.to_string()
    }

    fn arity(&mut self, line: usize, toks: &[Token], expected: &[usize]) -> bool {
        let found = toks.len() - 1;
        if expected.contains(&found) {
            return true;
        }
        let want = expected
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(" or ");
        let column = toks.get(expected[0] + 1).unwrap_or(&toks[0]).column;
        self.error(
            line,
            column,
            format!("`{}` takes {want} operand(s), found {found}", toks[0].text),
        );
        false
    }
}

/// Parse circuit text. Static checks from [`validate`] are reported against
/// the offending line. Any error means no circuit is returned.
pub fn parse(text: &str) -> Result<Parsed, Vec<ParseDiagnostic>> {
    let mut p = Parser { diags: Vec::new() };
    let mut alpha: Option<f64> = None;
    let mut header_line = 1;
    let mut circuit = Circuit::new(f64::NAN);
    let mut lines_of = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokens(raw);
        let Some(head) = toks.first() else { continue };

        if alpha.is_none() {
            header_line = line;
            if head.text != "alpha" {
                p.error(
                    line,
                    head.column,
                    format!("expected `alpha REAL` header, found `{}`", head.text),
                );
                // keep going with a placeholder so later lines are still checked
                alpha = Some(f64::NAN);
            } else {
                if p.arity(line, &toks, &[1]) {
                    match parse_real(toks[1].text) {
                        Some(a) if a > 0.0 => alpha = Some(a),
                        _ => p.error(
                            line,
                            toks[1].column,
                            format!(
                                "alpha must be a positive finite number, found `{}`",
                                toks[1].text
                            ),
                        ),
                    }
                }
                let a = *alpha.get_or_insert(f64::NAN);
                circuit.declared_alpha = a;
                continue;
            }
        }
        let a = alpha.unwrap_or(f64::NAN);

        let ins = match head.text {
            "alpha" => {
                p.error(line, head.column, "alpha declared more than once".into());
                None
            }
            "prep" if p.arity(line, &toks, &[2]) => {
                let mode = p.name(line, &toks[1]);
                let amplitude = match toks[2].text {
                    "+" => Some(Complex64::new(a, 0.0)),
                    "-" => Some(Complex64::new(-a, 0.0)),
                    other => parse_complex(other),
                };
                match amplitude {
                    Some(amplitude) => Some(Instruction::Prep { mode, amplitude }),
                    None => {
                        p.error(
                            line,
                            toks[2].column,
                            format!("invalid amplitude `{}`", toks[2].text),
                        );
                        None
                    }
                }
            }
            "h" if p.arity(line, &toks, &[1, 3]) => {
                let mode = p.name(line, &toks[1]);
                if toks.len() == 2 {
                    Some(Instruction::Hadamard { mode, alpha_ref: a })
                } else if toks[2].text != "ref" {
                    p.error(
                        line,
                        toks[2].column,
                        format!("expected `ref`, found `{}`", toks[2].text),
                    );
                    None
                } else {
                    match parse_real(toks[3].text) {
                        Some(r) => {
                            if same(r, a) {
                                p.report(
                                    line,
                                    toks[2].column,
                                    Severity::Warning,
                                    "`ref` equals the declared alpha and is redundant".into(),
                                );
                            }
                            Some(Instruction::Hadamard { mode, alpha_ref: r })
                        }
                        None => {
                            p.error(
                                line,
                                toks[3].column,
                                format!("invalid number `{}`", toks[3].text),
                            );
                            None
                        }
                    }
                }
            }
            "bs" if p.arity(line, &toks, &[2]) => Some(Instruction::Bs {
                first: p.name(line, &toks[1]),
                second: p.name(line, &toks[2]),
            }),
            "split" if p.arity(line, &toks, &[2]) => Some(Instruction::Split {
                source: p.name(line, &toks[1]),
                new_mode: p.name(line, &toks[2]),
            }),
            "select0" if p.arity(line, &toks, &[1]) => Some(Instruction::Select0 {
                mode: p.name(line, &toks[1]),
            }),
            "prep" | "h" | "bs" | "split" | "select0" => None,
            other => {
                p.error(line, head.column, format!("unknown keyword `{other}`"));
                None
            }
        };
        if let Some(ins) = ins {
            circuit.push(ins);
            lines_of.push(line);
        }
    }

    if alpha.is_none() {
        p.error(header_line, 1, "missing `alpha REAL` header".into());
    }
    let has_errors = |d: &[ParseDiagnostic]| d.iter().any(|x| x.severity == Severity::Error);
    if !has_errors(&p.diags) {
        for d in validate(&circuit) {
            let line = d.index.map_or(header_line, |i| lines_of[i]);
            p.error(line, 1, d.kind.to_string());
        }
    }
    if has_errors(&p.diags) {
        p.diags.sort_by_key(|d| d.span);
        return Err(p.diags);
    }
    Ok(Parsed {
        circuit,
        warnings: p.diags,
    })
}
