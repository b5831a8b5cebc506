//! Batch front end: scenario files, statement files, and the two commands
//! exposed by the `mindgrid` binary.
//!
//! `run` replays one scenario, infers the observer posterior, and emits a
//! statement-score table (plus per-step goal marginals), while `compare`
//! scores statements both in their home scenario and in foil scenarios and
//! reports the contrast. Output is CSV or JSON lines with a fixed column
//! order and deterministic number formatting, so reruns are byte-identical.
//!
//! # Scenario files
//!
//! Plain text, four to five bracketed sections:
//!
//! ```text
//! [grid]
//! ########
//! #@.1..T#
//! #......#
//! ########
//!
//! [contents]
//! box1: red
//!
//! [rules]
//! max_hidden_keys: 1
//! hidden_colors: red blue
//!
//! [actions]
//! right open(box1) pickup(box1)
//! down right right right up collect(triangle)
//!
//! [judgment-points]
//! peek: 1
//! ```
//!
//! The grid block is one contiguous ASCII map (see [`GridMap::from_ascii`]
//! for the legend). `[contents]` fixes the true content of each box; boxes
//! not listed are empty. `[rules]` bounds the hypothesis space of initial
//! states; omitted keys fall back to permissive defaults. `[actions]` is a
//! whitespace-separated token list: `up`, `down`, `left`, `right`, `noop`,
//! `open(boxN)`, `pickup(boxN)`, `pickup(x,y)`, `unlock(color)`,
//! `unlock(x,y)`, `collect(shape)`, `collect(x,y)`. `[judgment-points]`
//! names time steps; when absent, a point is placed before every box
//! opening (`p1`, `p2`, ...) plus `end`.
//!
//! # Statement files
//!
//! Tab-separated, one statement per line, `#` comments allowed:
//!
//! ```text
//! id <TAB> tense <TAB> kind <TAB> text
//! ```
//!
//! `tense` is `initial` or `current`, `kind` is `elot` (text is a formula)
//! or `nl` (text is an English sentence for the translation backend). The
//! `compare` command takes six columns: `id`, home scenario name, judgment
//! point name, then tense, kind, text as above.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::btom::{run_inference, AgentVariant, InferenceConfig, Posterior};
use crate::elot::{lower, parse_epistemic, DomainSignature, LoweredFormula, ThresholdTable};
use crate::evaluator::{score_statement, PriorMode, Tense};
use crate::gridworld::{
    enumerate_initial_states, transition, valid_actions, Action, BoxContent, Cell, Dir, GemKind,
    GridMap, KeyColor, ScenarioRules,
};
use crate::translator::{translate, Backend, ExternalBackend, FixtureBackend, TranslateError};

/// How long the external translator may take per sentence.
const TRANSLATE_TIMEOUT: Duration = Duration::from_secs(30);

/// Candidates requested from the translation backend per sentence.
const TRANSLATE_CANDIDATES: usize = 5;

/// A command failure, split by exit code: bad input exits 2, a posterior
/// with no surviving hypotheses exits 3.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Degenerate(msg) => write!(f, "degenerate posterior: {msg}"),
        }
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// A parsed scenario file: the map, the true hidden contents, the
/// hypothesis-space rules, the replayed action sequence (already validated
/// against the true world), and any named judgment points.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub map: GridMap,
    pub contents: Vec<BoxContent>,
    pub rules: ScenarioRules,
    pub actions: Vec<Action>,
    pub points: Vec<(String, usize)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Grid,
    Contents,
    Rules,
    Actions,
    Points,
}

/// Parses and validates one scenario. The action sequence is replayed in
/// the true world; any step that is not a valid action there is an input
/// error, so downstream code can assume the trajectory is well-formed.
pub fn parse_scenario(text: &str, name: &str) -> Result<Scenario, CliError> {
    let mut section = Section::None;
    let mut grid_lines: Vec<&str> = Vec::new();
    let mut content_lines: Vec<(usize, &str)> = Vec::new();
    let mut rule_lines: Vec<(usize, &str)> = Vec::new();
    let mut action_tokens: Vec<(usize, &str)> = Vec::new();
    let mut point_lines: Vec<(usize, &str)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end();
        let trimmed = line.trim();
        if trimmed.starts_with('[') && trimmed.ends_with(']') {
            section = match trimmed {
                "[grid]" => Section::Grid,
                "[contents]" => Section::Contents,
                "[rules]" => Section::Rules,
                "[actions]" => Section::Actions,
                "[judgment-points]" => Section::Points,
                other => return Err(input(format!("{name}:{lineno}: unknown section {other}"))),
            };
            continue;
        }
        // The grid block keeps raw lines; '#' is a wall there, not a comment.
        if section == Section::Grid {
            grid_lines.push(line);
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match section {
            Section::None => {
                return Err(input(format!(
                    "{name}:{lineno}: content before any [section] header"
                )))
            }
            Section::Contents => content_lines.push((lineno, trimmed)),
            Section::Rules => rule_lines.push((lineno, trimmed)),
            Section::Actions => action_tokens.extend(
                trimmed
                    .split('#')
                    .next()
                    .unwrap_or("")
                    .split_whitespace()
                    .map(|t| (lineno, t)),
            ),
            Section::Points => point_lines.push((lineno, trimmed)),
            Section::Grid => unreachable!(),
        }
    }

    // Trim blank padding around the grid block, then demand contiguity.
    while grid_lines.first().is_some_and(|l| l.trim().is_empty()) {
        grid_lines.remove(0);
    }
    while grid_lines.last().is_some_and(|l| l.trim().is_empty()) {
        grid_lines.pop();
    }
    if grid_lines.is_empty() {
        return Err(input(format!("{name}: missing or empty [grid] section")));
    }
    if grid_lines.iter().any(|l| l.trim().is_empty()) {
        return Err(input(format!("{name}: grid block must be contiguous")));
    }
    let map = GridMap::from_ascii(&grid_lines.join("\n"))
        .map_err(|e| input(format!("{name}: bad grid: {e}")))?;

    let mut contents: Vec<BoxContent> = vec![None; map.boxes.len()];
    let mut seen_boxes = vec![false; map.boxes.len()];
    for (lineno, line) in content_lines {
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| input(format!("{name}:{lineno}: expected `boxN: content`")))?;
        let b = parse_box_ref(key.trim(), map.boxes.len())
            .ok_or_else(|| input(format!("{name}:{lineno}: unknown box {:?}", key.trim())))?;
        if seen_boxes[b] {
            return Err(input(format!("{name}:{lineno}: box{} listed twice", b + 1)));
        }
        seen_boxes[b] = true;
        contents[b] = match value.trim() {
            "empty" => None,
            color => Some(KeyColor::parse(color).ok_or_else(|| {
                input(format!("{name}:{lineno}: unknown content {color:?}"))
            })?),
        };
    }

    let rules = parse_rules(&rule_lines, name)?;

    let mut actions = Vec::with_capacity(action_tokens.len());
    let mut state = map.initial_state(&contents);
    for (lineno, token) in action_tokens {
        let action = parse_action_token(token, &map)
            .map_err(|e| input(format!("{name}:{lineno}: {e}")))?;
        if !valid_actions(&map, &state).contains(&action) {
            return Err(input(format!(
                "{name}:{lineno}: action {token:?} (step {}) is not valid in the true world",
                actions.len()
            )));
        }
        state = transition(&map, &state, action);
        actions.push(action);
    }

    let mut points: Vec<(String, usize)> = Vec::new();
    for (lineno, line) in point_lines {
        let (pname, value) = line
            .split_once(':')
            .ok_or_else(|| input(format!("{name}:{lineno}: expected `name: step`")))?;
        let pname = pname.trim();
        if pname.is_empty() || pname == "end" || pname == "all" || pname.starts_with("t=") {
            return Err(input(format!(
                "{name}:{lineno}: judgment point name {pname:?} is reserved"
            )));
        }
        let t: usize = value
            .trim()
            .parse()
            .map_err(|_| input(format!("{name}:{lineno}: bad step {:?}", value.trim())))?;
        if t > actions.len() {
            return Err(input(format!(
                "{name}:{lineno}: step {t} is past the end of the action sequence ({})",
                actions.len()
            )));
        }
        if points.iter().any(|(p, _)| p == pname) {
            return Err(input(format!(
                "{name}:{lineno}: judgment point {pname:?} listed twice"
            )));
        }
        points.push((pname.to_string(), t));
    }

    Ok(Scenario {
        name: name.to_string(),
        map,
        contents,
        rules,
        actions,
        points,
    })
}

fn parse_rules(lines: &[(usize, &str)], name: &str) -> Result<ScenarioRules, CliError> {
    // Permissive defaults: any box may hide a key of any color.
    let mut rules = ScenarioRules {
        max_hidden_keys: usize::MAX,
        hidden_colors: KeyColor::ALL.to_vec(),
        required_hidden: None,
        solvable_for_every_gem: false,
        no_excess: false,
    };
    for &(lineno, line) in lines {
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| input(format!("{name}:{lineno}: expected `key: value`")))?;
        let value = value.trim();
        match key.trim() {
            "max_hidden_keys" => {
                rules.max_hidden_keys = value
                    .parse()
                    .map_err(|_| input(format!("{name}:{lineno}: bad count {value:?}")))?;
            }
            "hidden_colors" => {
                let mut colors = Vec::new();
                for word in value.split_whitespace() {
                    colors.push(KeyColor::parse(word).ok_or_else(|| {
                        input(format!("{name}:{lineno}: unknown color {word:?}"))
                    })?);
                }
                rules.hidden_colors = colors;
            }
            "required_hidden" => {
                let mut required = Vec::new();
                for pair in value.split_whitespace() {
                    let (color, count) = pair.split_once('=').ok_or_else(|| {
                        input(format!("{name}:{lineno}: expected `color=N`, got {pair:?}"))
                    })?;
                    let color = KeyColor::parse(color).ok_or_else(|| {
                        input(format!("{name}:{lineno}: unknown color {color:?}"))
                    })?;
                    let count: usize = count
                        .parse()
                        .map_err(|_| input(format!("{name}:{lineno}: bad count {count:?}")))?;
                    required.push((color, count));
                }
                rules.required_hidden = Some(required);
            }
            "solvable_for_every_gem" => {
                rules.solvable_for_every_gem = parse_bool(value)
                    .ok_or_else(|| input(format!("{name}:{lineno}: expected true or false")))?;
            }
            "no_excess" => {
                rules.no_excess = parse_bool(value)
                    .ok_or_else(|| input(format!("{name}:{lineno}: expected true or false")))?;
            }
            other => {
                return Err(input(format!("{name}:{lineno}: unknown rule {other:?}")));
            }
        }
    }
    Ok(rules)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// `boxN` (1-based) to a box index, bounds-checked.
fn parse_box_ref(token: &str, n_boxes: usize) -> Option<usize> {
    let digits = token.strip_prefix("box")?;
    let n: usize = digits.parse().ok()?;
    (1..=n_boxes).contains(&n).then(|| n - 1)
}

fn parse_cell(args: &[&str]) -> Option<Cell> {
    if args.len() != 2 {
        return None;
    }
    Some((args[0].parse().ok()?, args[1].parse().ok()?))
}

/// One action token into an [`Action`]. Entity references are resolved
/// against the map: by name (`box2`, `red`, `triangle`) or by cell.
fn parse_action_token(token: &str, map: &GridMap) -> Result<Action, String> {
    match token {
        "up" => return Ok(Action::Move(Dir::Up)),
        "down" => return Ok(Action::Move(Dir::Down)),
        "left" => return Ok(Action::Move(Dir::Left)),
        "right" => return Ok(Action::Move(Dir::Right)),
        "noop" => return Ok(Action::NoOp),
        _ => {}
    }
    let (head, rest) = token
        .split_once('(')
        .ok_or_else(|| format!("unknown action {token:?}"))?;
    let inner = rest
        .strip_suffix(')')
        .ok_or_else(|| format!("unclosed parenthesis in {token:?}"))?;
    let args: Vec<&str> = inner.split(',').map(str::trim).collect();
    match head {
        "open" => {
            let b = single(&args)
                .and_then(|a| parse_box_ref(a, map.boxes.len()))
                .ok_or_else(|| format!("open expects a box, got {token:?}"))?;
            Ok(Action::Open(b as u8))
        }
        "pickup" => {
            if let Some(b) = single(&args).and_then(|a| parse_box_ref(a, map.boxes.len())) {
                return Ok(Action::PickupKey(map.boxes[b]));
            }
            let cell =
                parse_cell(&args).ok_or_else(|| format!("pickup expects a box or a cell"))?;
            Ok(Action::PickupKey(cell))
        }
        "unlock" => {
            if let Some(color) = single(&args).and_then(KeyColor::parse) {
                let d = map
                    .doors
                    .iter()
                    .position(|&(c, _)| c == color)
                    .ok_or_else(|| format!("no {} door on this map", color.as_str()))?;
                return Ok(Action::Unlock(d as u8));
            }
            let cell =
                parse_cell(&args).ok_or_else(|| format!("unlock expects a color or a cell"))?;
            let d = map
                .door_at(cell)
                .ok_or_else(|| format!("no door at ({},{})", cell.0, cell.1))?;
            Ok(Action::Unlock(d as u8))
        }
        "collect" => {
            if let Some(kind) = single(&args).and_then(GemKind::parse) {
                let matches = map.gems.iter().filter(|&&(k, _)| k == kind).count();
                if matches > 1 {
                    return Err(format!(
                        "{} is ambiguous here; use collect(x,y)",
                        kind.as_str()
                    ));
                }
                let g = map
                    .gem_index(kind)
                    .ok_or_else(|| format!("no {} on this map", kind.as_str()))?;
                return Ok(Action::Collect(g as u8));
            }
            let cell =
                parse_cell(&args).ok_or_else(|| format!("collect expects a shape or a cell"))?;
            let g = map
                .gem_at(cell)
                .ok_or_else(|| format!("no gem at ({},{})", cell.0, cell.1))?;
            Ok(Action::Collect(g as u8))
        }
        _ => Err(format!("unknown action {token:?}")),
    }
}

fn single<'a>(args: &[&'a str]) -> Option<&'a str> {
    (args.len() == 1).then(|| args[0])
}

/// One statement to score.
#[derive(Debug, Clone)]
pub struct StatementRow {
    pub id: String,
    pub tense: Tense,
    pub kind: StatementKind,
    pub text: String,
}

/// Whether the statement text is already a formula or needs translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatementKind {
    Elot,
    Nl,
}

impl StatementKind {
    pub fn parse(s: &str) -> Option<StatementKind> {
        match s {
            "elot" => Some(StatementKind::Elot),
            "nl" => Some(StatementKind::Nl),
            _ => None,
        }
    }
}

/// Parses a four-column statement file (see the module docs).
pub fn parse_statements(text: &str, name: &str) -> Result<Vec<StatementRow>, CliError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(input(format!(
                "{name}:{lineno}: expected 4 tab-separated fields, got {}",
                fields.len()
            )));
        }
        rows.push(parse_statement_fields(
            fields[0], fields[1], fields[2], fields[3], name, lineno,
        )?);
    }
    let mut ids: Vec<&str> = rows.iter().map(|r| r.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(input(format!("{name}: duplicate statement id {:?}", w[0])));
    }
    Ok(rows)
}

fn parse_statement_fields(
    id: &str,
    tense: &str,
    kind: &str,
    text: &str,
    name: &str,
    lineno: usize,
) -> Result<StatementRow, CliError> {
    let tense = Tense::parse(tense)
        .ok_or_else(|| input(format!("{name}:{lineno}: bad tense {tense:?}")))?;
    let kind = StatementKind::parse(kind)
        .ok_or_else(|| input(format!("{name}:{lineno}: bad kind {kind:?}")))?;
    if text.trim().is_empty() {
        return Err(input(format!("{name}:{lineno}: empty statement text")));
    }
    Ok(StatementRow {
        id: id.to_string(),
        tense,
        kind,
        text: text.trim().to_string(),
    })
}

/// A `compare` statement row: a statement plus its home scenario and the
/// judgment point name to score at (`end` for the last step).
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub home: String,
    pub judgment: String,
    pub statement: StatementRow,
}

/// Parses a six-column comparison statement file (see the module docs).
pub fn parse_compare_statements(text: &str, name: &str) -> Result<Vec<CompareRow>, CliError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(input(format!(
                "{name}:{lineno}: expected 6 tab-separated fields, got {}",
                fields.len()
            )));
        }
        let statement = parse_statement_fields(
            fields[0], fields[3], fields[4], fields[5], name, lineno,
        )?;
        rows.push(CompareRow {
            home: fields[1].trim().to_string(),
            judgment: fields[2].trim().to_string(),
            statement,
        });
    }
    Ok(rows)
}

/// Default judgment points: one just before each box opening, plus the end
/// of the action sequence.
pub fn default_judgment_points(actions: &[Action]) -> Vec<(String, usize)> {
    let mut points = Vec::new();
    let mut n = 0;
    for (t, action) in actions.iter().enumerate() {
        if matches!(action, Action::Open(_)) {
            n += 1;
            points.push((format!("p{n}"), t));
        }
    }
    points.push(("end".to_string(), actions.len()));
    points
}

/// Resolves the `--judgment-points` flag against a scenario: `all` takes
/// every step, a comma list takes names (scenario-defined or default),
/// `end`, and `t=N` entries; no flag takes the scenario's own points, or
/// the defaults when it has none.
fn resolve_judgment_points(
    scenario: &Scenario,
    flag: Option<&str>,
) -> Result<Vec<(String, usize)>, CliError> {
    let horizon = scenario.actions.len();
    let named = if scenario.points.is_empty() {
        default_judgment_points(&scenario.actions)
    } else {
        scenario.points.clone()
    };
    let Some(flag) = flag else {
        return Ok(named);
    };
    if flag.trim() == "all" {
        return Ok((0..=horizon).map(|t| (format!("t{t}"), t)).collect());
    }
    let mut points = Vec::new();
    for token in flag.split(',') {
        let token = token.trim();
        if token == "end" {
            points.push(("end".to_string(), horizon));
        } else if let Some(step) = token.strip_prefix("t=") {
            let t: usize = step
                .parse()
                .map_err(|_| input(format!("bad judgment point {token:?}")))?;
            if t > horizon {
                return Err(input(format!(
                    "judgment point {token:?} is past the end of the action sequence ({horizon})"
                )));
            }
            points.push((token.to_string(), t));
        } else {
            let t = named
                .iter()
                .find(|(name, _)| name == token)
                .map(|&(_, t)| t)
                .ok_or_else(|| input(format!("unknown judgment point {token:?}")))?;
            points.push((token.to_string(), t));
        }
    }
    if points.is_empty() {
        return Err(input("empty judgment point list"));
    }
    Ok(points)
}

/// Model flags shared by `run` and `compare`.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Boltzmann inverse temperature of the modeled agent.
    #[arg(long)]
    beta: Option<f64>,

    /// Particles per modeled belief state.
    #[arg(long)]
    particles: Option<u8>,

    /// Agent model: full, true_belief, or non_planning.
    #[arg(long, default_value = "full")]
    variant: String,

    /// Score normalization: statement (normalized likelihood against the
    /// pre-behavior prior) or worlds (raw posterior mass).
    #[arg(long, default_value = "statement")]
    prior: String,

    /// Threshold override file: `name value` lines, `#` comments.
    #[arg(long)]
    thresholds: Option<PathBuf>,

    /// Translation backend for `nl` statements: `fixture`, or
    /// `external:<command>` speaking the line protocol on stdin/stdout.
    #[arg(long, default_value = "fixture")]
    backend: String,

    /// Score the full weighted mixture of translation candidates instead
    /// of only the top one.
    #[arg(long)]
    mixture: bool,
}

/// Validated model settings.
struct Settings {
    config: InferenceConfig,
    prior: PriorMode,
    thresholds: ThresholdTable,
    backend: String,
    mixture: bool,
}

impl Settings {
    fn from_args(args: &ModelArgs) -> Result<Settings, CliError> {
        let mut config = InferenceConfig::default();
        if let Some(beta) = args.beta {
            if !beta.is_finite() || beta <= 0.0 {
                return Err(input(format!("--beta must be positive, got {beta}")));
            }
            config.beta = beta;
        }
        if let Some(particles) = args.particles {
            if particles == 0 {
                return Err(input("--particles must be at least 1"));
            }
            config.particles = particles;
        }
        config.variant = AgentVariant::parse(&args.variant)
            .ok_or_else(|| input(format!("unknown --variant {:?}", args.variant)))?;
        let prior = PriorMode::parse(&args.prior)
            .ok_or_else(|| input(format!("unknown --prior {:?}", args.prior)))?;
        let mut thresholds = ThresholdTable::default();
        if let Some(path) = &args.thresholds {
            let text = read_file(path)?;
            thresholds
                .apply_overrides(&text)
                .map_err(|e| input(format!("{}: {e}", path.display())))?;
        }
        if args.backend != "fixture" && !args.backend.starts_with("external:") {
            return Err(input(format!(
                "unknown --backend {:?}; expected fixture or external:<command>",
                args.backend
            )));
        }
        Ok(Settings {
            config,
            prior,
            thresholds,
            backend: args.backend.clone(),
            mixture: args.mixture,
        })
    }

    fn build_backend(&self) -> Result<Box<dyn Backend>, CliError> {
        if let Some(command) = self.backend.strip_prefix("external:") {
            let backend = ExternalBackend::spawn(command, TRANSLATE_TIMEOUT)
                .map_err(|e| input(format!("starting translator: {e}")))?;
            Ok(Box::new(backend))
        } else {
            Ok(Box::new(FixtureBackend::gold()))
        }
    }

    /// `key=value` pairs echoed at the top of every output document.
    fn echo(&self) -> Vec<(String, String)> {
        let mut pairs = vec![
            ("beta".to_string(), fmt_sig9(self.config.beta)),
            ("particles".to_string(), self.config.particles.to_string()),
            ("variant".to_string(), self.config.variant.as_str().to_string()),
            ("prior".to_string(), self.prior.as_str().to_string()),
            ("backend".to_string(), self.backend.clone()),
            ("mixture".to_string(), self.mixture.to_string()),
        ];
        for (name, value) in self.thresholds.entries() {
            pairs.push((format!("threshold_{name}"), fmt_sig9(value)));
        }
        pairs
    }
}

/// A statement lowered to one or more weighted formulas, ready to score.
struct ResolvedStatement {
    id: String,
    tense: Tense,
    candidates: Vec<(LoweredFormula, f64)>,
}

fn resolve_statements(
    rows: &[StatementRow],
    domain: &DomainSignature,
    settings: &Settings,
) -> Result<Vec<ResolvedStatement>, CliError> {
    let mut backend: Option<Box<dyn Backend>> = None;
    let mut resolved = Vec::with_capacity(rows.len());
    for row in rows {
        let candidates = match row.kind {
            StatementKind::Elot => {
                let formula = parse_epistemic(&row.text, domain)
                    .map_err(|e| input(format!("statement {}: {e}", row.id)))?;
                let lowered = lower(&formula, domain)
                    .map_err(|e| input(format!("statement {}: {e}", row.id)))?;
                vec![(lowered, 1.0)]
            }
            StatementKind::Nl => {
                if backend.is_none() {
                    backend = Some(settings.build_backend()?);
                }
                let translation = translate(
                    backend.as_mut().expect("just filled").as_mut(),
                    &row.text,
                    domain,
                    TRANSLATE_CANDIDATES,
                )
                .map_err(|e| {
                    let hint = if matches!(e, TranslateError::UnknownSentence(_)) {
                        "; pass --backend external:<command> to translate novel sentences"
                    } else {
                        ""
                    };
                    input(format!("statement {}: {e}{hint}", row.id))
                })?;
                let picked = if settings.mixture {
                    translation.candidates.clone()
                } else {
                    vec![(translation.top().clone(), 1.0)]
                };
                let mut lowered = Vec::with_capacity(picked.len());
                for (formula, weight) in picked {
                    let f = lower(&formula, domain)
                        .map_err(|e| input(format!("statement {}: {e}", row.id)))?;
                    lowered.push((f, weight));
                }
                lowered
            }
        };
        resolved.push(ResolvedStatement {
            id: row.id.clone(),
            tense: row.tense,
            candidates,
        });
    }
    Ok(resolved)
}

/// Weighted mixture of per-candidate scores: (raw mass, reported score).
fn score_resolved(
    posterior: &Posterior,
    judgment_t: usize,
    statement: &ResolvedStatement,
    settings: &Settings,
) -> Result<(f64, f64), CliError> {
    let mut raw = 0.0;
    let mut score = 0.0;
    for (formula, weight) in &statement.candidates {
        let s = score_statement(
            posterior,
            judgment_t,
            statement.tense,
            formula,
            &settings.thresholds,
            settings.prior,
        )
        .ok_or_else(|| {
            CliError::Degenerate(format!(
                "no surviving hypotheses at step {judgment_t} (statement {})",
                statement.id
            ))
        })?;
        raw += weight * s.raw;
        score += weight * s.score;
    }
    Ok((raw, score))
}

/// Formats a float with nine significant digits, shortest form: the value
/// is rounded through scientific notation, then printed plainly.
pub fn fmt_sig9(x: f64) -> String {
    debug_assert!(x.is_finite(), "table floats must be finite");
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("rounded float reparses");
    format!("{rounded}")
}

/// Output table: fixed column order, preformatted cells.
struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

const SCORE_COLUMNS: &[&str] = &[
    "scenario",
    "statement",
    "judgment_point",
    "t",
    "posterior",
    "normalized_likelihood",
    "variant",
];

const GOAL_COLUMNS: &[&str] = &["scenario", "t", "gem", "probability", "variant"];

const COMPARE_COLUMNS: &[&str] = &[
    "scenario",
    "statement",
    "in_context",
    "out_context",
    "difference",
    "accuracy",
    "variant",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Csv,
    Jsonl,
}

impl OutputFormat {
    fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "jsonl" | "json-lines" => Some(OutputFormat::Jsonl),
            _ => None,
        }
    }
}

fn csv_escape(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// Renders a table. CSV puts the config echo in `# key=value` comment
/// lines before the header; JSON lines puts it in a leading
/// `{"config": {...}}` object. Every JSON value is a string, matching the
/// CSV cells byte for byte.
fn render(table: &Table, echo: &[(String, String)], format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            for (key, value) in echo {
                out.push_str(&format!("# {key}={value}\n"));
            }
            out.push_str(&table.columns.join(","));
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|c| csv_escape(c)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        OutputFormat::Jsonl => {
            let config: serde_json::Map<String, serde_json::Value> = echo
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect();
            let header = serde_json::json!({ "config": config });
            out.push_str(&header.to_string());
            out.push('\n');
            for row in &table.rows {
                let object: serde_json::Map<String, serde_json::Value> = table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(col, cell)| {
                        (col.to_string(), serde_json::Value::String(cell.clone()))
                    })
                    .collect();
                out.push_str(&serde_json::Value::Object(object).to_string());
                out.push('\n');
            }
        }
    }
    out
}

/// Per-step goal marginal table over the whole trajectory.
fn goal_table(scenario: &Scenario, posterior: &Posterior, settings: &Settings) -> Result<Table, CliError> {
    let mut rows = Vec::new();
    for t in 0..=posterior.horizon() {
        let marginal = posterior.goal_posterior(t).ok_or_else(|| {
            CliError::Degenerate(format!("no surviving hypotheses at step {t}"))
        })?;
        for (g, &(kind, _)) in scenario.map.gems.iter().enumerate() {
            rows.push(vec![
                scenario.name.clone(),
                t.to_string(),
                kind.as_str().to_string(),
                fmt_sig9(marginal[g]),
                settings.config.variant.as_str().to_string(),
            ]);
        }
    }
    Ok(Table {
        columns: GOAL_COLUMNS,
        rows,
    })
}

fn infer(scenario: &Scenario, settings: &Settings) -> Result<Posterior, CliError> {
    let candidates = enumerate_initial_states(&scenario.map, &scenario.rules);
    if candidates.is_empty() {
        return Err(input(format!(
            "{}: scenario rules admit no initial state",
            scenario.name
        )));
    }
    let true_initial = scenario.map.initial_state(&scenario.contents);
    run_inference(
        &scenario.map,
        &candidates,
        &true_initial,
        &scenario.actions,
        &settings.config,
    )
    .map_err(|e| input(format!("{}: {e}", scenario.name)))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn scenario_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = read_file(path)?;
    parse_scenario(&text, &scenario_name(path))
}

#[derive(Parser, Debug)]
#[command(
    name = "mindgrid",
    about = "Score graded belief statements about an agent in a gridworld",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Replay one scenario and score statements at judgment points.
    Run(RunArgs),
    /// Score statements in their home scenario and in foil scenarios.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario file.
    scenario: PathBuf,

    /// Statement file (4 tab-separated columns); when omitted, the
    /// command emits goal marginals only.
    #[arg(long)]
    statements: Option<PathBuf>,

    /// Judgment points: `all`, or a comma list of names, `end`, and
    /// `t=N`. Defaults to the scenario's own points, or one point before
    /// each box opening plus `end`.
    #[arg(long, value_name = "LIST")]
    judgment_points: Option<String>,

    /// Primary output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write goal marginals here when statements are being scored.
    #[arg(long)]
    goals_out: Option<PathBuf>,

    /// Output format: csv or jsonl.
    #[arg(long, default_value = "csv")]
    format: String,

    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Scenario files; every statement is scored in each of them.
    #[arg(long, value_delimiter = ',', required = true)]
    scenarios: Vec<PathBuf>,

    /// Comparison statement file (6 tab-separated columns).
    #[arg(long)]
    statements: PathBuf,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format: csv or jsonl.
    #[arg(long, default_value = "csv")]
    format: String,

    #[command(flatten)]
    model: ModelArgs,
}

/// Rendered `run` output: the primary document (scores when statements
/// were given, goal marginals otherwise) and the goal document.
struct RunOutput {
    primary: String,
    goals: String,
}

fn execute_run(args: &RunArgs) -> Result<RunOutput, CliError> {
    let settings = Settings::from_args(&args.model)?;
    let format = OutputFormat::parse(&args.format)
        .ok_or_else(|| input(format!("unknown --format {:?}", args.format)))?;
    let scenario = load_scenario(&args.scenario)?;
    let posterior = infer(&scenario, &settings)?;

    let mut echo = vec![("scenario".to_string(), scenario.name.clone())];
    echo.extend(settings.echo());
    let goals = render(&goal_table(&scenario, &posterior, &settings)?, &echo, format);

    let Some(statements_path) = &args.statements else {
        return Ok(RunOutput {
            primary: goals.clone(),
            goals,
        });
    };

    let rows = parse_statements(&read_file(statements_path)?, &scenario_name(statements_path))?;
    let domain = scenario.map.domain_signature();
    let resolved = resolve_statements(&rows, &domain, &settings)?;
    let points = resolve_judgment_points(&scenario, args.judgment_points.as_deref())?;

    let mut score_rows = Vec::new();
    for statement in &resolved {
        for (pname, t) in &points {
            let (raw, score) = score_resolved(&posterior, *t, statement, &settings)?;
            score_rows.push(vec![
                scenario.name.clone(),
                statement.id.clone(),
                pname.clone(),
                t.to_string(),
                fmt_sig9(raw),
                fmt_sig9(score),
                settings.config.variant.as_str().to_string(),
            ]);
        }
    }
    let table = Table {
        columns: SCORE_COLUMNS,
        rows: score_rows,
    };
    Ok(RunOutput {
        primary: render(&table, &echo, format),
        goals,
    })
}

fn execute_compare(args: &CompareArgs) -> Result<String, CliError> {
    let settings = Settings::from_args(&args.model)?;
    let format = OutputFormat::parse(&args.format)
        .ok_or_else(|| input(format!("unknown --format {:?}", args.format)))?;
    if args.scenarios.len() < 2 {
        return Err(input("compare needs at least two scenarios"));
    }

    let mut scenarios = Vec::with_capacity(args.scenarios.len());
    for path in &args.scenarios {
        scenarios.push(load_scenario(path)?);
    }
    for pair in scenarios.windows(2) {
        if scenarios.iter().filter(|s| s.name == pair[0].name).count() > 1 {
            return Err(input(format!("duplicate scenario name {:?}", pair[0].name)));
        }
    }

    let rows = parse_compare_statements(
        &read_file(&args.statements)?,
        &scenario_name(&args.statements),
    )?;
    if rows.is_empty() {
        return Err(input("no statements to compare"));
    }
    for row in &rows {
        if !scenarios.iter().any(|s| s.name == row.home) {
            return Err(input(format!(
                "statement {}: home scenario {:?} was not loaded",
                row.statement.id, row.home
            )));
        }
    }

    // One posterior per scenario; statements resolve against each map's
    // own signature, since box or gem inventories may differ.
    let mut posteriors = Vec::with_capacity(scenarios.len());
    let mut resolved = Vec::with_capacity(scenarios.len());
    for scenario in &scenarios {
        posteriors.push(infer(scenario, &settings)?);
        let domain = scenario.map.domain_signature();
        let statements: Vec<StatementRow> = rows.iter().map(|r| r.statement.clone()).collect();
        resolved.push(resolve_statements(&statements, &domain, &settings)?);
    }

    let mut echo: Vec<(String, String)> = vec![(
        "scenarios".to_string(),
        scenarios
            .iter()
            .map(|s| s.name.as_str())
            .collect::<Vec<_>>()
            .join(" "),
    )];
    echo.extend(settings.echo());

    let mut out_rows = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut in_score = None;
        let mut out_scores = Vec::new();
        for (s, scenario) in scenarios.iter().enumerate() {
            // A named point belongs to the home scenario; foils score at
            // their own end of trajectory (or the same name if they have it).
            let t = point_or_end(scenario, &row.judgment);
            let (_, score) = score_resolved(&posteriors[s], t, &resolved[s][i], &settings)?;
            if scenario.name == row.home {
                in_score = Some(score);
            } else {
                out_scores.push(score);
            }
        }
        let in_score = in_score.expect("home scenario checked above");
        let out_mean = out_scores.iter().sum::<f64>() / out_scores.len() as f64;
        out_rows.push(vec![
            row.home.clone(),
            row.statement.id.clone(),
            fmt_sig9(in_score),
            fmt_sig9(out_mean),
            fmt_sig9(in_score - out_mean),
            ((in_score > out_mean) as u8).to_string(),
            settings.config.variant.as_str().to_string(),
        ]);
    }
    let table = Table {
        columns: COMPARE_COLUMNS,
        rows: out_rows,
    };
    Ok(render(&table, &echo, format))
}

/// A judgment point by name, falling back to the end of the trajectory
/// when this scenario does not define it (`end` always means the end).
fn point_or_end(scenario: &Scenario, name: &str) -> usize {
    if name == "end" {
        return scenario.actions.len();
    }
    let named = if scenario.points.is_empty() {
        default_judgment_points(&scenario.actions)
    } else {
        scenario.points.clone()
    };
    named
        .iter()
        .find(|(n, _)| n == name)
        .map(|&(_, t)| t)
        .unwrap_or(scenario.actions.len())
}

fn write_output(path: Option<&Path>, document: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, document)
            .map_err(|e| input(format!("{}: {e}", path.display()))),
        None => {
            print!("{document}");
            Ok(())
        }
    }
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let output = execute_run(args)?;
            write_output(args.out.as_deref(), &output.primary)?;
            if let Some(goals_path) = &args.goals_out {
                write_output(Some(goals_path), &output.goals)?;
            }
            Ok(())
        }
        Command::Compare(args) => {
            let document = execute_compare(args)?;
            write_output(args.out.as_deref(), &document)
        }
    }
}

/// Parses arguments and runs one command, returning the process exit code:
/// 0 on success, 2 on input errors, 3 on a degenerate posterior.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
