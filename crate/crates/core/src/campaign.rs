//! Simulator commands and the line-oriented campaign text format.
//!
//! Each line simulates one trace and has the shape
//! `F<int>* L<int> (I<int>? R<int> S<int>?)+`. A campaign may end with one
//! cleanup line made only of `F<int>` commands. Tokens are an uppercase
//! letter immediately followed by a canonical decimal integer, separated
//! by exactly one space; lines end with `\n`.

use std::fmt::{self, Write as _};
use std::io::BufRead;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimCommand {
    Load(u64),
    Free(u64),
    Inject(u64),
    Run(u64),
    Store(u64),
}

impl SimCommand {
    pub fn letter(self) -> char {
        match self {
            SimCommand::Load(_) => 'L',
            SimCommand::Free(_) => 'F',
            SimCommand::Inject(_) => 'I',
            SimCommand::Run(_) => 'R',
            SimCommand::Store(_) => 'S',
        }
    }

    pub fn arg(self) -> u64 {
        match self {
            SimCommand::Load(x)
            | SimCommand::Free(x)
            | SimCommand::Inject(x)
            | SimCommand::Run(x)
            | SimCommand::Store(x) => x,
        }
    }
}

impl fmt::Display for SimCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter(), self.arg())
    }
}

/// Whether a line simulates a trace or only releases states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Scenario,
    Cleanup,
}

/// One campaign line. Construction through [`CampaignLine::new`] checks
/// the grammar.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CampaignLine(Vec<SimCommand>);

impl CampaignLine {
    pub fn new(commands: Vec<SimCommand>) -> Result<Self> {
        check_grammar(&commands).map_err(|(idx, detail)| Error::Parse {
            line: 0,
            column: idx + 1,
            detail,
        })?;
        Ok(CampaignLine(commands))
    }

    pub(crate) fn from_checked(commands: Vec<SimCommand>) -> Self {
        debug_assert!(check_grammar(&commands).is_ok(), "{commands:?}");
        CampaignLine(commands)
    }

    pub fn commands(&self) -> &[SimCommand] {
        &self.0
    }

    pub fn kind(&self) -> LineKind {
        if self.0.iter().all(|c| matches!(c, SimCommand::Free(_))) {
            LineKind::Cleanup
        } else {
            LineKind::Scenario
        }
    }

    /// Sum of `Run` arguments.
    pub fn run_total(&self) -> u64 {
        self.0
            .iter()
            .map(|c| match c {
                SimCommand::Run(t) => *t,
                _ => 0,
            })
            .sum()
    }

    /// Appends the rendered line (with trailing newline) to `out`.
    pub fn render_into(&self, out: &mut String) {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{c}");
        }
        out.push('\n');
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s);
        s
    }
}

impl fmt::Display for CampaignLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Checks one command list against the line grammar. On failure returns the
/// index of the offending command.
fn check_grammar(cmds: &[SimCommand]) -> std::result::Result<(), (usize, String)> {
    #[derive(PartialEq)]
    enum St {
        Frees,
        AfterLoad,
        AfterInject,
        AfterRun,
        AfterStore,
    }
    if cmds.is_empty() {
        return Err((0, "empty line".into()));
    }
    let mut st = St::Frees;
    for (i, c) in cmds.iter().enumerate() {
        match (c, &st) {
            (SimCommand::Inject(0), _) => {
                return Err((i, "inject argument must be positive".into()))
            }
            (SimCommand::Run(0), _) => return Err((i, "run argument must be positive".into())),
            (SimCommand::Free(_), St::Frees) => {}
            (SimCommand::Load(_), St::Frees) => st = St::AfterLoad,
            (SimCommand::Inject(_), St::AfterLoad | St::AfterRun | St::AfterStore) => {
                st = St::AfterInject
            }
            (
                SimCommand::Run(_),
                St::AfterLoad | St::AfterInject | St::AfterRun | St::AfterStore,
            ) => st = St::AfterRun,
            (SimCommand::Store(_), St::AfterRun) => st = St::AfterStore,
            (c, _) => return Err((i, format!("unexpected command {c}"))),
        }
    }
    match st {
        St::Frees | St::AfterRun | St::AfterStore => Ok(()),
        St::AfterLoad => Err((cmds.len() - 1, "load must be followed by a run".into())),
        St::AfterInject => Err((cmds.len() - 1, "inject must be followed by a run".into())),
    }
}

fn parse_token(tok: &str) -> std::result::Result<SimCommand, String> {
    let mut chars = tok.chars();
    let letter = chars.next().ok_or("empty token")?;
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("malformed token {tok:?}"));
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return Err(format!("leading zero in {tok:?}"));
    }
    let v: u64 = digits
        .parse()
        .map_err(|_| format!("integer out of range in {tok:?}"))?;
    Ok(match letter {
        'L' => SimCommand::Load(v),
        'F' => SimCommand::Free(v),
        'I' => SimCommand::Inject(v),
        'R' => SimCommand::Run(v),
        'S' => SimCommand::Store(v),
        _ => return Err(format!("unknown command {letter:?}")),
    })
}

/// Parses one line (without its terminator). `line_no` is used for errors.
pub fn parse_line(text: &str, line_no: usize) -> Result<CampaignLine> {
    let err = |column: usize, detail: String| Error::Parse {
        line: line_no,
        column,
        detail,
    };
    if text.is_empty() {
        return Err(err(1, "empty line".into()));
    }
    let mut cmds = Vec::new();
    let mut columns = Vec::new();
    let mut col = 1;
    for tok in text.split(' ') {
        if tok.is_empty() {
            return Err(err(
                col,
                "expected exactly one space between commands".into(),
            ));
        }
        cmds.push(parse_token(tok).map_err(|d| err(col, d))?);
        columns.push(col);
        col += tok.len() + 1;
    }
    check_grammar(&cmds).map_err(|(i, d)| err(columns[i], d))?;
    Ok(CampaignLine(cmds))
}

/// A whole campaign held in memory.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Campaign {
    pub lines: Vec<CampaignLine>,
}

impl Campaign {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            l.render_into(&mut s);
        }
        s
    }

    pub fn commands(&self) -> impl Iterator<Item = SimCommand> + '_ {
        self.lines.iter().flat_map(|l| l.commands().iter().copied())
    }

    pub fn run_total(&self) -> u64 {
        self.lines.iter().map(CampaignLine::run_total).sum()
    }
}

/// Parses a complete campaign text.
pub fn parse_campaign(text: &str) -> Result<Campaign> {
    let lines = CampaignReader::new(text.as_bytes()).collect::<Result<Vec<_>>>()?;
    Ok(Campaign { lines })
}

/// Streaming campaign parser over any buffered reader.
pub struct CampaignReader<R> {
    input: R,
    buf: String,
    line_no: usize,
    saw_cleanup: bool,
    done: bool,
}

impl<R: BufRead> CampaignReader<R> {
    pub fn new(input: R) -> Self {
        CampaignReader {
            input,
            buf: String::new(),
            line_no: 0,
            saw_cleanup: false,
            done: false,
        }
    }

    /// Number of lines consumed so far.
    pub fn line_no(&self) -> usize {
        self.line_no
    }

    fn read_next(&mut self) -> Result<Option<CampaignLine>> {
        self.buf.clear();
        let n = self
            .input
            .read_line(&mut self.buf)
            .map_err(|e| Error::Parse {
                line: self.line_no + 1,
                column: 1,
                detail: e.to_string(),
            })?;
        if n == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        let text = self.buf.strip_suffix('\n').ok_or_else(|| Error::Parse {
            line: self.line_no,
            column: self.buf.len() + 1,
            detail: "missing line terminator".into(),
        })?;
        if self.saw_cleanup {
            return Err(Error::Parse {
                line: self.line_no,
                column: 1,
                detail: "only the final line may consist solely of frees".into(),
            });
        }
        let line = parse_line(text, self.line_no)?;
        if line.kind() == LineKind::Cleanup {
            self.saw_cleanup = true;
        }
        Ok(Some(line))
    }
}

impl<R: BufRead> Iterator for CampaignReader<R> {
    type Item = Result<CampaignLine>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_next() {
            Ok(Some(l)) => Some(Ok(l)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use SimCommand::*;

    #[test]
    fn renders_example_line() {
        let l = CampaignLine::new(vec![Load(2), Inject(1), Run(1), Store(8), Run(2)]).unwrap();
        assert_eq!(l.render(), "L2 I1 R1 S8 R2\n");
        let l = CampaignLine::new(vec![Load(0), Run(5)]).unwrap();
        assert_eq!(l.to_string(), "L0 R5");
    }

    #[test]
    fn parses_golden_campaign() {
        let text = "L0 R1 S1 R1 S2 R3\nL2 I1 R1 S8 R2\nL8 I2 R2\nF2 F8 L1 I1 R3 I1 R1\nF1 L0 I1 R3 S23 R2\nL23 I1 R2\nF23\n";
        let c = parse_campaign(text).unwrap();
        assert_eq!(c.lines.len(), 7);
        assert_eq!(c.run_total(), 21);
        assert_eq!(c.lines[6].kind(), LineKind::Cleanup);
        assert_eq!(c.render(), text);
    }

    #[test]
    fn grammar_violations_report_position() {
        let cases = [
            ("L0 R1\nR1 L0\n", 2, 1),
            ("L0  R1\n", 1, 4),
            ("L0 R1 S1 S2\n", 1, 10),
            ("L0 I0 R1\n", 1, 4),
            ("L0 R0\n", 1, 4),
            ("L0 I1\n", 1, 4),
            ("L0\n", 1, 1),
            ("L0 R01\n", 1, 4),
            ("L0 X1\n", 1, 4),
            ("F1\nL0 R1\n", 2, 1),
            ("L0 R1 F2\n", 1, 7),
            ("L0 R1", 1, 6),
            ("\n", 1, 1),
            ("L0 R1\r\n", 1, 4),
        ];
        for (text, line, column) in cases {
            match parse_campaign(text) {
                Err(Error::Parse {
                    line: l, column: c, ..
                }) => {
                    assert_eq!((l, c), (line, column), "{text:?}")
                }
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn empty_campaign() {
        assert!(parse_campaign("").unwrap().lines.is_empty());
    }

    fn arb_line() -> impl Strategy<Value = Vec<SimCommand>> {
        let group = (
            proptest::option::of(1u64..1000),
            1u64..50,
            proptest::option::of(any::<u64>()),
        );
        (
            proptest::collection::vec(any::<u64>(), 0..4),
            any::<u64>(),
            proptest::collection::vec(group, 1..6),
        )
            .prop_map(|(frees, load, groups)| {
                let mut v: Vec<SimCommand> = frees.into_iter().map(Free).collect();
                v.push(Load(load));
                for (i, r, s) in groups {
                    v.extend(i.map(Inject));
                    v.push(Run(r));
                    v.extend(s.map(Store));
                }
                v
            })
    }

    proptest! {
        #[test]
        fn render_parse_roundtrip(lines in proptest::collection::vec(arb_line(), 0..8)) {
            let c = Campaign { lines: lines.into_iter().map(|l| CampaignLine::new(l).unwrap()).collect() };
            let text = c.render();
            prop_assert_eq!(parse_campaign(&text).unwrap(), c);
        }
    }
}
