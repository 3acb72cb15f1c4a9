//! Line-based circuit description format.
//!
//! ```text
//! # comments run to end of line
//! space photon modes=3
//! input mode=0 pol=L oam=0
//! bs 0 1 t=1/3
//! mirror 1
//! ps 1 phase=1          # in units of π
//! hwp 1
//! qp 0
//! detector 2 name=D3 filter=pol:R,oam:2
//! ```
//!
//! Neutron circuits use `space neutron`, `input mode=<i> spin=<up|down>
//! energy=<0|1>`, the `sf` and `rf` elements and `filter=spin:<up|down>,energy:<0|1>`.
//! A beam splitter may carry a trailing `conj` flag for the inverse convention.

use crate::error::{Error, Result};

use super::element::{Element, Phase};
use super::space::{CircuitSpace, Internal, Platform, Pol, Spin};
use super::Circuit;

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn semantic(line: usize, message: impl Into<String>) -> Error {
    Error::Semantic {
        line,
        message: message.into(),
    }
}

fn semantic_from(line: usize, e: Error) -> Error {
    match e {
        Error::Config(message) => semantic(line, message),
        other => semantic(line, other.to_string()),
    }
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = line.split('#').next().unwrap_or("");
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (pos, ch) in code
        .char_indices()
        .chain(std::iter::once((code.len(), ' ')))
    {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &code[s..pos],
                    column: code[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    tokens
}

/// Rational (`a/b`) or decimal; a `pi`/`π` factor in the numerator is
/// dropped, so `pi/2`, `1/2` and `0.5` all read as one half.
pub(crate) fn parse_number(text: &str) -> Option<f64> {
    let text = text.replace('π', "pi");
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.to_string(), Some(d.to_string())),
        None => (text.clone(), None),
    };
    let num = match num.strip_suffix("pi") {
        Some("") | Some("+") => "1".to_string(),
        Some("-") => "-1".to_string(),
        Some(rest) => rest.to_string(),
        None => num,
    };
    let value: f64 = num.parse().ok()?;
    let value = match den {
        Some(d) => {
            let d: f64 = d.parse().ok()?;
            if d == 0.0 {
                return None;
            }
            value / d
        }
        None => value,
    };
    value.is_finite().then_some(value)
}

struct Args<'a> {
    line: usize,
    positional: Vec<Token<'a>>,
    keyed: Vec<(Token<'a>, &'a str)>,
    end_column: usize,
}

impl<'a> Args<'a> {
    fn new(line: usize, tokens: &[Token<'a>], end_column: usize) -> Result<Self> {
        let mut positional = Vec::new();
        let mut keyed: Vec<(Token<'a>, &'a str)> = Vec::new();
        for &tok in tokens {
            match tok.text.split_once('=') {
                Some((key, value)) => {
                    if key.is_empty() || value.is_empty() {
                        return Err(syntax(
                            line,
                            tok.column,
                            format!("malformed argument `{}`", tok.text),
                        ));
                    }
                    if keyed.iter().any(|(k, _)| k.text == key) {
                        return Err(syntax(
                            line,
                            tok.column,
                            format!("duplicate argument `{key}`"),
                        ));
                    }
                    keyed.push((
                        Token {
                            text: key,
                            column: tok.column,
                        },
                        value,
                    ));
                }
                None => positional.push(tok),
            }
        }
        Ok(Self {
            line,
            positional,
            keyed,
            end_column,
        })
    }

    fn expect_positional(&self, names: &[&str], optional_flags: &[&str]) -> Result<Vec<Token<'a>>> {
        let mut values = Vec::new();
        for (i, name) in names.iter().enumerate() {
            match self.positional.get(i) {
                Some(t) => values.push(*t),
                None => {
                    return Err(syntax(
                        self.line,
                        self.end_column,
                        format!("missing {name}"),
                    ))
                }
            }
        }
        for extra in &self.positional[names.len()..] {
            if !optional_flags.contains(&extra.text) {
                return Err(syntax(
                    self.line,
                    extra.column,
                    format!("unexpected token `{}`", extra.text),
                ));
            }
        }
        Ok(values)
    }

    fn flag(&self, name: &str) -> bool {
        self.positional.iter().any(|t| t.text == name)
    }

    fn allow_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.keyed {
            if !allowed.contains(&k.text) {
                return Err(syntax(
                    self.line,
                    k.column,
                    format!("unknown argument `{}`", k.text),
                ));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<(Token<'a>, &'a str)> {
        self.keyed.iter().find(|(k, _)| k.text == key).copied()
    }

    fn require(&self, key: &str) -> Result<(Token<'a>, &'a str)> {
        self.get(key)
            .ok_or_else(|| syntax(self.line, self.end_column, format!("missing `{key}=`")))
    }
}

fn parse_index(line: usize, tok: Token<'_>, text: &str) -> Result<usize> {
    text.parse().map_err(|_| {
        syntax(
            line,
            tok.column,
            format!("expected a mode index, got `{text}`"),
        )
    })
}

fn parse_int(line: usize, tok: Token<'_>, text: &str) -> Result<i32> {
    text.trim_start_matches('+').parse().map_err(|_| {
        syntax(
            line,
            tok.column,
            format!("expected an integer, got `{text}`"),
        )
    })
}

fn parse_pol(line: usize, tok: Token<'_>, text: &str) -> Result<Pol> {
    match text {
        "L" => Ok(Pol::L),
        "R" => Ok(Pol::R),
        _ => Err(syntax(
            line,
            tok.column,
            format!("polarization must be L or R, got `{text}`"),
        )),
    }
}

fn parse_spin(line: usize, tok: Token<'_>, text: &str) -> Result<Spin> {
    match text {
        "up" => Ok(Spin::Up),
        "down" => Ok(Spin::Down),
        _ => Err(syntax(
            line,
            tok.column,
            format!("spin must be up or down, got `{text}`"),
        )),
    }
}

fn parse_energy(line: usize, tok: Token<'_>, text: &str) -> Result<u8> {
    match text {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(syntax(
            line,
            tok.column,
            format!("energy must be 0 or 1, got `{text}`"),
        )),
    }
}

fn parse_filter(line: usize, tok: Token<'_>, text: &str, platform: Platform) -> Result<Internal> {
    let mut parts = std::collections::BTreeMap::new();
    for part in text.split(',') {
        let Some((k, v)) = part.split_once(':') else {
            return Err(syntax(
                line,
                tok.column,
                format!("filter entries are key:value, got `{part}`"),
            ));
        };
        if parts.insert(k, v).is_some() {
            return Err(syntax(
                line,
                tok.column,
                format!("duplicate filter key `{k}`"),
            ));
        }
    }
    let keys: Vec<&str> = parts.keys().copied().collect();
    let internal = match (keys.as_slice(), platform) {
        (["oam", "pol"], Platform::Photon) => Internal::Photon {
            pol: parse_pol(line, tok, parts["pol"])?,
            oam: parse_int(line, tok, parts["oam"])?,
        },
        (["energy", "spin"], Platform::Neutron) => Internal::Neutron {
            spin: parse_spin(line, tok, parts["spin"])?,
            energy: parse_energy(line, tok, parts["energy"])?,
        },
        (["oam", "pol"], _) | (["energy", "spin"], _) => {
            return Err(semantic(
                line,
                format!(
                    "filter `{text}` does not match a {} circuit",
                    platform.name()
                ),
            ))
        }
        _ => {
            return Err(syntax(
                line,
                tok.column,
                format!("filter needs pol:,oam: or spin:,energy:, got `{text}`"),
            ))
        }
    };
    internal.indices().map_err(|e| semantic_from(line, e))?;
    Ok(internal)
}

fn parse_space(line: usize, args: &Args<'_>) -> Result<CircuitSpace> {
    let [kind] = args.expect_positional(&["platform"], &[])?[..] else {
        unreachable!("one positional requested");
    };
    args.allow_keys(&["modes"])?;
    let platform = match kind.text {
        "photon" => Platform::Photon,
        "neutron" => Platform::Neutron,
        other => {
            return Err(syntax(
                line,
                kind.column,
                format!("platform must be photon or neutron, got `{other}`"),
            ))
        }
    };
    let (tok, value) = args.require("modes")?;
    let modes = parse_index(line, tok, value)?;
    CircuitSpace::new(platform, modes).map_err(|e| semantic_from(line, e))
}

fn parse_input(line: usize, args: &Args<'_>, platform: Platform) -> Result<(usize, Internal)> {
    args.expect_positional(&[], &[])?;
    let (tok, mode) = args.require("mode")?;
    let mode = parse_index(line, tok, mode)?;
    let internal = match platform {
        Platform::Photon => {
            args.allow_keys(&["mode", "pol", "oam"])?;
            let (pt, p) = args.require("pol")?;
            let (ot, o) = args.require("oam")?;
            Internal::Photon {
                pol: parse_pol(line, pt, p)?,
                oam: parse_int(line, ot, o)?,
            }
        }
        Platform::Neutron => {
            args.allow_keys(&["mode", "spin", "energy"])?;
            let (st, s) = args.require("spin")?;
            let (et, e) = args.require("energy")?;
            Internal::Neutron {
                spin: parse_spin(line, st, s)?,
                energy: parse_energy(line, et, e)?,
            }
        }
    };
    Ok((mode, internal))
}

fn parse_element(
    line: usize,
    directive: Token<'_>,
    args: &Args<'_>,
    platform: Platform,
) -> Result<Element> {
    let single_mode = |args: &Args<'_>| -> Result<usize> {
        args.allow_keys(&[])?;
        let [m] = args.expect_positional(&["mode"], &[])?[..] else {
            unreachable!("one positional requested");
        };
        parse_index(line, m, m.text)
    };
    Ok(match directive.text {
        "bs" => {
            args.allow_keys(&["t"])?;
            let [a, b] = args.expect_positional(&["mode a", "mode b"], &["conj"])?[..] else {
                unreachable!("two positionals requested");
            };
            let (tt, t) = args.require("t")?;
            let t = parse_number(t)
                .ok_or_else(|| syntax(line, tt.column, format!("bad transmittance `{t}`")))?;
            Element::BeamSplitter {
                a: parse_index(line, a, a.text)?,
                b: parse_index(line, b, b.text)?,
                t,
                conjugate: args.flag("conj"),
            }
        }
        "ps" => {
            args.allow_keys(&["phase"])?;
            let [m] = args.expect_positional(&["mode"], &[])?[..] else {
                unreachable!("one positional requested");
            };
            let (pt, p) = args.require("phase")?;
            let phase = parse_number(p)
                .ok_or_else(|| syntax(line, pt.column, format!("bad phase `{p}`")))?;
            Element::PhaseShifter {
                mode: parse_index(line, m, m.text)?,
                phase: Phase(phase),
            }
        }
        "mirror" => Element::Mirror {
            mode: single_mode(args)?,
        },
        "hwp" => Element::HalfWavePlate {
            mode: single_mode(args)?,
        },
        "qp" => Element::QPlate {
            mode: single_mode(args)?,
        },
        "sf" => Element::SpinFlipper {
            mode: single_mode(args)?,
        },
        "rf" => Element::RfFlipper {
            mode: single_mode(args)?,
        },
        "detector" => {
            args.allow_keys(&["name", "filter"])?;
            let [m] = args.expect_positional(&["mode"], &[])?[..] else {
                unreachable!("one positional requested");
            };
            let (nt, name) = args.require("name")?;
            if !name
                .chars()
                .all(|c| c.is_alphanumeric() || c == '_' || c == '-')
            {
                return Err(syntax(
                    line,
                    nt.column,
                    format!("detector name `{name}` must be alphanumeric"),
                ));
            }
            let filter = match args.get("filter") {
                Some((ft, f)) => Some(parse_filter(line, ft, f, platform)?),
                None => None,
            };
            Element::Detector {
                mode: parse_index(line, m, m.text)?,
                name: name.to_string(),
                filter,
            }
        }
        other => {
            return Err(syntax(
                line,
                directive.column,
                format!("unknown directive `{other}`"),
            ))
        }
    })
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let tokens = tokenize(raw);
        let Some((&directive, rest)) = tokens.split_first() else {
            continue;
        };
        let end_column = raw
            .split('#')
            .next()
            .unwrap_or("")
            .trim_end()
            .chars()
            .count()
            + 1;
        let args = Args::new(line, rest, end_column)?;
        match (directive.text, circuit.as_mut()) {
            ("space", None) => circuit = Some(Circuit::new(parse_space(line, &args)?)),
            ("space", Some(_)) => return Err(semantic(line, "duplicate `space` header")),
            (_, None) => return Err(semantic(line, "circuit must start with a `space` header")),
            ("input", Some(c)) => {
                if c.input().is_some() {
                    return Err(semantic(line, "duplicate `input` line"));
                }
                let (mode, internal) = parse_input(line, &args, c.space().platform())?;
                c.set_input(mode, internal)
                    .map_err(|e| semantic_from(line, e))?;
            }
            (_, Some(c)) => {
                let element = parse_element(line, directive, &args, c.space().platform())?;
                c.push(element).map_err(|e| semantic_from(line, e))?;
            }
        }
    }
    circuit.ok_or_else(|| semantic(0, "empty circuit description (no `space` header)"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1/3"), Some(1.0 / 3.0));
        assert_eq!(parse_number("0.5"), Some(0.5));
        assert_eq!(parse_number("pi/2"), Some(0.5));
        assert_eq!(parse_number("-π"), Some(-1.0));
        assert_eq!(parse_number("3pi/4"), Some(0.75));
        assert_eq!(parse_number("1/0"), None);
        assert_eq!(parse_number("abc"), None);
    }

    #[test]
    fn single_beam_splitter() {
        let c = parse_circuit("space photon modes=2\nbs 0 1 t=1/3\n").unwrap();
        assert_eq!(
            c.elements(),
            &[Element::BeamSplitter {
                a: 0,
                b: 1,
                t: 1.0 / 3.0,
                conjugate: false
            }]
        );
    }

    #[test]
    fn mode_out_of_range_is_semantic() {
        let err = parse_circuit("space photon modes=4\nbs 0 9 t=1/3\n").unwrap_err();
        match err {
            Error::Semantic { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("mode 9"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_directive_reports_column() {
        let err = parse_circuit("space photon modes=2\n  lens 0\n").unwrap_err();
        assert_eq!(
            err,
            Error::Syntax {
                line: 2,
                column: 3,
                message: "unknown directive `lens`".into()
            }
        );
    }

    #[test]
    fn bad_value_column_points_at_token() {
        let err = parse_circuit("space photon modes=2\nbs 0 x t=1/3\n").unwrap_err();
        assert!(
            matches!(
                err,
                Error::Syntax {
                    line: 2,
                    column: 6,
                    ..
                }
            ),
            "{err:?}"
        );
        let err = parse_circuit("space photon modes=2\nbs 0 1 t=1/3 extra\n").unwrap_err();
        assert!(
            matches!(
                err,
                Error::Syntax {
                    line: 2,
                    column: 14,
                    ..
                }
            ),
            "{err:?}"
        );
        let err = parse_circuit("space photon modes=2\nbs 0 1\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn semantic_errors() {
        let dup = "space photon modes=3\ndetector 0 name=A\ndetector 0 name=B\n";
        assert!(matches!(
            parse_circuit(dup),
            Err(Error::Semantic { line: 3, .. })
        ));
        let dup_name = "space photon modes=3\ndetector 0 name=A\ndetector 1 name=A\n";
        assert!(matches!(
            parse_circuit(dup_name),
            Err(Error::Semantic { line: 3, .. })
        ));
        let wrong_platform = "space neutron modes=3\nhwp 0\n";
        assert!(matches!(
            parse_circuit(wrong_platform),
            Err(Error::Semantic { line: 2, .. })
        ));
        let wrong_filter = "space neutron modes=3\ndetector 0 name=A filter=pol:R,oam:2\n";
        assert!(matches!(
            parse_circuit(wrong_filter),
            Err(Error::Semantic { line: 2, .. })
        ));
        let no_header = "bs 0 1 t=1/2\n";
        assert!(matches!(
            parse_circuit(no_header),
            Err(Error::Semantic { line: 1, .. })
        ));
        let odd_oam = "space photon modes=2\ninput mode=0 pol=L oam=1\n";
        assert!(matches!(
            parse_circuit(odd_oam),
            Err(Error::Semantic { line: 2, .. })
        ));
        let bad_t = "space photon modes=2\nbs 0 1 t=3/2\n";
        assert!(matches!(
            parse_circuit(bad_t),
            Err(Error::Semantic { line: 2, .. })
        ));
        assert!(parse_circuit("# nothing\n").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\nspace neutron modes=2   # two modes\ninput mode=1 spin=down energy=1\nrf 1 # flip\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.elements().len(), 1);
        assert_eq!(
            c.input().unwrap().internal,
            Internal::Neutron {
                spin: Spin::Down,
                energy: 1
            }
        );
    }
}
