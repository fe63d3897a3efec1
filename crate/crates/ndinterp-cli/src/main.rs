//! Command-line front end for interpolation tables: build tables from
//! built-in test functions or CSV data, evaluate stored tables under any
//! method stack, inspect table metadata and benchmark method choices.
//!
//! Exit codes: 0 success, 2 usage or parse errors, 3 I/O and format
//! errors, 4 out-of-range evaluation under the raise policy.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use ndinterp::io::{read_table, write_table};
use ndinterp::{Axis, Error, ErrorPolicy, MethodDescriptor, MultiFunction, MultiMap, Node, Value};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

mod format;
use format::{format_components, format_f64};

#[derive(Parser)]
#[command(
    name = "ndit",
    about = "Build, evaluate, inspect and benchmark n-dimensional interpolation tables",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a built-in function over a tensor-product grid, or ingest
    /// CSV rows, and write an NDIT table.
    Build {
        /// Per-dimension axes, comma separated: grid:<n>:<min>:<max> or
        /// set:<v1>:<v2>:... (required with --function).
        #[arg(long)]
        axes: Option<String>,
        /// Built-in function: sinsum, polyprod or hesse3.
        #[arg(long, conflicts_with = "csv")]
        function: Option<String>,
        /// CSV input: one row per element, abscissa columns then one
        /// ordinate column; a non-numeric first row is skipped.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Output table path.
        out: PathBuf,
    },
    /// Evaluate a stored table under a method stack.
    Eval {
        /// One descriptor per dimension, comma separated, e.g.
        /// grid:polint3,sorted:spline:h
        #[arg(long)]
        spec: String,
        /// Points file (one point per line) or inline points
        /// "x0,x1;x0,x1".
        #[arg(long)]
        points: String,
        /// Return this value instead of failing on interpolation errors.
        #[arg(long)]
        default: Option<f64>,
        /// Table path.
        table: PathBuf,
    },
    /// Print table dimensions, per-level counts, ranges and grid layout.
    Info { table: PathBuf },
    /// Compare method stacks on one table: evaluations per second and
    /// maximum absolute difference against the first (reference) stack.
    Bench {
        /// Method stacks separated by ';', each a comma-separated
        /// descriptor list.
        #[arg(long)]
        spec: String,
        /// Timing repetitions over the generated point set; 0 skips the
        /// timing column.
        #[arg(long, default_value_t = 100)]
        reps: u64,
        table: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::IoFormat { .. } => 3,
            Error::ValueOutOfRange { .. } => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("ndit: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Build {
            axes,
            function,
            csv,
            out,
        } => build(axes, function, csv, &out),
        Command::Eval {
            spec,
            points,
            default,
            table,
        } => eval(&spec, &points, default, &table),
        Command::Info { table } => info(&table),
        Command::Bench { spec, reps, table } => bench(&spec, reps, &table),
    }
}

// ---------------------------------------------------------------------
// build
// ---------------------------------------------------------------------

fn builtin(name: &str, dims: usize) -> Result<fn(&[f64]) -> f64, Failure> {
    match name {
        "sinsum" => Ok(|key| key.iter().map(|x| x.sin()).sum()),
        "polyprod" => Ok(polyprod),
        "hesse3" => {
            if dims != 3 {
                return Err(Failure::usage(format!(
                    "hesse3 is a 3-dimensional function, {dims} axes given"
                )));
            }
            Ok(|k| k[0] * k[0] + 3.0 * k[0] * k[1] + 2.0 * k[1] * k[2] + k[2] * k[2])
        }
        other => Err(Failure::usage(format!(
            "unknown built-in function '{other}'"
        ))),
    }
}

/// Product of one fixed cubic per axis; coefficient rows repeat beyond
/// five dimensions.
const AXIS_CUBICS: [[f64; 4]; 5] = [
    [1.0, 0.5, -0.25, 0.125],
    [0.5, -1.0, 0.75, 0.2],
    [2.0, 0.3, -0.5, -0.125],
    [1.5, -0.6, 0.2, 0.4],
    [0.8, 1.1, -0.3, -0.2],
];

fn polyprod(key: &[f64]) -> f64 {
    key.iter()
        .enumerate()
        .map(|(i, &t)| {
            let c = AXIS_CUBICS[i % AXIS_CUBICS.len()];
            ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
        })
        .product()
}

fn parse_axes(text: &str) -> Result<Vec<Axis>, Failure> {
    text.split(',').map(parse_axis).collect()
}

fn parse_axis(text: &str) -> Result<Axis, Failure> {
    let bad = |why: &str| Failure::usage(format!("bad axis '{text}': {why}"));
    let mut parts = text.split(':');
    match parts.next() {
        Some("grid") => {
            let fields: Vec<&str> = parts.collect();
            if fields.len() != 3 {
                return Err(bad("expected grid:<n>:<min>:<max>"));
            }
            let n: usize = fields[0].parse().map_err(|_| bad("bad node count"))?;
            let min: f64 = fields[1].parse().map_err(|_| bad("bad minimum"))?;
            let max: f64 = fields[2].parse().map_err(|_| bad("bad maximum"))?;
            Axis::grid(n, min, max).map_err(Failure::from)
        }
        Some("set") => {
            let values: Result<Vec<f64>, _> = parts.map(str::parse).collect();
            let values = values.map_err(|_| bad("bad abscissa value"))?;
            if values.is_empty() {
                return Err(bad("set axis needs at least one value"));
            }
            Axis::set(values).map_err(Failure::from)
        }
        _ => Err(bad("expected grid:... or set:...")),
    }
}

fn build(
    axes: Option<String>,
    function: Option<String>,
    csv: Option<PathBuf>,
    out: &std::path::Path,
) -> Result<(), Failure> {
    let map = match (function, csv) {
        (Some(name), None) => {
            let axes = axes.ok_or_else(|| Failure::usage("--function requires --axes"))?;
            let axes = parse_axes(&axes)?;
            let fill = builtin(&name, axes.len())?;
            let mut map = MultiMap::new(axes.len());
            map.configure(&axes, fill)?;
            map
        }
        (None, Some(path)) => {
            if axes.is_some() {
                return Err(Failure::usage(
                    "--axes does not apply to CSV input; keys come from the rows",
                ));
            }
            read_csv_table(&path)?
        }
        _ => {
            return Err(Failure::usage(
                "exactly one of --function or --csv is required",
            ))
        }
    };
    let file = File::create(out)
        .map_err(|e| Failure::io(format!("cannot create {}: {e}", out.display())))?;
    write_table(&map, BufWriter::new(file))?;
    println!("{} elements", map.leaf_count());
    Ok(())
}

fn read_csv_table(path: &std::path::Path) -> Result<MultiMap, Failure> {
    let file = File::open(path)
        .map_err(|e| Failure::io(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let mut map: Option<MultiMap> = None;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::usage(format!("CSV row {}: {e}", index + 1)))?;
        let fields: Vec<&str> = record.iter().collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        let numbers: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let numbers = match numbers {
            Ok(n) => n,
            // A non-numeric leading row is an optional header.
            Err(_) if index == 0 => continue,
            Err(e) => {
                return Err(Failure::usage(format!("CSV row {}: {e}", index + 1)));
            }
        };
        if numbers.len() < 2 {
            return Err(Failure::usage(format!(
                "CSV row {}: need at least one abscissa column and one ordinate",
                index + 1
            )));
        }
        let dims = numbers.len() - 1;
        let map = map.get_or_insert_with(|| MultiMap::new(dims));
        if map.dims() != dims {
            return Err(Failure::usage(format!(
                "CSV row {}: {} columns, expected {}",
                index + 1,
                numbers.len(),
                map.dims() + 1
            )));
        }
        let value = numbers[dims];
        *map.insert_new(&numbers[..dims]).map_err(Failure::from)? = value;
    }
    map.ok_or_else(|| Failure::usage("CSV file contains no data rows"))
}

// ---------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------

fn load_table(path: &std::path::Path) -> Result<MultiMap, Failure> {
    let file = File::open(path)
        .map_err(|e| Failure::io(format!("cannot open {}: {e}", path.display())))?;
    read_table(BufReader::new(file)).map_err(Failure::from)
}

fn parse_spec_list(text: &str) -> Result<Vec<MethodDescriptor>, Failure> {
    text.split(',')
        .map(|s| MethodDescriptor::parse(s).map_err(Failure::from))
        .collect()
}

fn assemble(
    map: MultiMap,
    descriptors: Vec<MethodDescriptor>,
    default: Option<f64>,
) -> Result<MultiFunction, Failure> {
    if descriptors.len() != map.dims() {
        // Dimension mismatch between the stored table and the requested
        // method stack is a format-level failure.
        return Err(Failure::io(format!(
            "table has {} dimensions, method stack has {}",
            map.dims(),
            descriptors.len()
        )));
    }
    let mut function = MultiFunction::from_parts(descriptors, map)?;
    if let Some(value) = default {
        function.set_policy(ErrorPolicy::Default(Value::Scalar(value)));
    }
    function.compile_all()?;
    Ok(function)
}

fn parse_points(text: &str, dims: usize) -> Result<Vec<Vec<f64>>, Failure> {
    let body = if std::path::Path::new(text).is_file() {
        std::fs::read_to_string(text)
            .map_err(|e| Failure::io(format!("cannot read {text}: {e}")))?
    } else {
        text.replace(';', "\n")
    };
    let mut points = Vec::new();
    for (index, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: Result<Vec<f64>, _> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(str::parse)
            .collect();
        let coords = coords.map_err(|e| Failure::usage(format!("point {}: {e}", index + 1)))?;
        if coords.len() != dims {
            return Err(Failure::usage(format!(
                "point {}: {} coordinates, table has {} dimensions",
                index + 1,
                coords.len(),
                dims
            )));
        }
        points.push(coords);
    }
    if points.is_empty() {
        return Err(Failure::usage("no evaluation points given"));
    }
    Ok(points)
}

fn eval(
    spec: &str,
    points: &str,
    default: Option<f64>,
    table: &std::path::Path,
) -> Result<(), Failure> {
    let map = load_table(table)?;
    let descriptors = parse_spec_list(spec)?;
    let points = parse_points(points, map.dims())?;
    let function = assemble(map, descriptors, default)?;
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for point in &points {
        let value = function.evaluate(point)?;
        writeln!(out, "{}", format_components(&value)).map_err(|e| Failure::io(e.to_string()))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------
// info
// ---------------------------------------------------------------------

#[derive(Default)]
struct LevelSummary {
    min_count: usize,
    max_count: usize,
    min_x: f64,
    max_x: f64,
    any: bool,
    all_grids: bool,
}

fn scan_levels(node: &Node, level: usize, summaries: &mut Vec<LevelSummary>) {
    let summary = &mut summaries[level];
    let n = node.len();
    let equidistant = match node {
        Node::Leaf(c) => ndinterp::is_equidistant(c),
        Node::Branch(c) => ndinterp::is_equidistant(c),
    };
    let xs = node.abscissas();
    if !summary.any {
        summary.min_count = n;
        summary.max_count = n;
        summary.min_x = f64::INFINITY;
        summary.max_x = f64::NEG_INFINITY;
        summary.all_grids = true;
        summary.any = true;
    } else {
        summary.min_count = summary.min_count.min(n);
        summary.max_count = summary.max_count.max(n);
    }
    summary.all_grids &= equidistant || n < 2;
    if let (Some(first), Some(last)) = (xs.first(), xs.last()) {
        summary.min_x = summary.min_x.min(*first);
        summary.max_x = summary.max_x.max(*last);
    }
    if let Node::Branch(c) = node {
        for e in c.iter() {
            scan_levels(&e.y, level + 1, summaries);
        }
    }
}

fn info(table: &std::path::Path) -> Result<(), Failure> {
    let map = load_table(table)?;
    println!("D={}, leaves={}", map.dims(), map.leaf_count());
    let mut summaries: Vec<LevelSummary> = Vec::new();
    summaries.resize_with(map.dims(), LevelSummary::default);
    scan_levels(map.root(), 0, &mut summaries);
    for (level, s) in summaries.iter().enumerate() {
        if !s.any || s.max_count == 0 {
            println!("level {level}: count=0");
            continue;
        }
        let count = if s.min_count == s.max_count {
            format!("count={}", s.min_count)
        } else {
            format!("count={}..{}", s.min_count, s.max_count)
        };
        let range = if s.min_x.is_finite() {
            format!(", range=[{}, {}]", s.min_x, s.max_x)
        } else {
            String::new()
        };
        let grid = if s.all_grids { "yes" } else { "no" };
        println!("level {level}: {count}{range}, grid={grid}");
    }
    Ok(())
}

// ---------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------

const BENCH_POINTS: usize = 1000;

fn bench(spec: &str, reps: u64, table: &std::path::Path) -> Result<(), Failure> {
    let map = load_table(table)?;
    let stacks: Vec<(String, Vec<MethodDescriptor>)> = spec
        .split(';')
        .map(|s| parse_spec_list(s).map(|d| (s.to_string(), d)))
        .collect::<Result<_, _>>()?;
    if stacks.is_empty() {
        return Err(Failure::usage("no method stacks given"));
    }

    // Evaluation points drawn from the per-level global ranges, fixed
    // seed so runs are reproducible.
    let mut summaries: Vec<LevelSummary> = Vec::new();
    summaries.resize_with(map.dims(), LevelSummary::default);
    scan_levels(map.root(), 0, &mut summaries);
    let mut rng = StdRng::seed_from_u64(0x6e64_6974);
    let points: Vec<Vec<f64>> = (0..BENCH_POINTS)
        .map(|_| {
            summaries
                .iter()
                .map(|s| {
                    let span = s.max_x - s.min_x;
                    s.min_x + span * rng.gen_range(0.001..0.999)
                })
                .collect()
        })
        .collect();

    let mut reference: Option<Vec<Vec<f64>>> = None;
    println!("spec,evals_per_sec,max_abs_error_vs_reference");
    for (name, descriptors) in stacks {
        let function = assemble(map.clone(), descriptors, None)?;
        let mut flattened: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for point in &points {
            let value = function.evaluate(point)?;
            let mut components = Vec::new();
            ndinterp::Linear::flatten_into(&value, &mut components);
            flattened.push(components);
        }
        let max_err = match &reference {
            None => {
                reference = Some(flattened);
                0.0
            }
            Some(reference) => {
                let mut worst: f64 = 0.0;
                for (a, b) in reference.iter().zip(&flattened) {
                    let shared = a.len().min(b.len());
                    for i in 0..shared {
                        worst = worst.max((a[i] - b[i]).abs());
                    }
                }
                worst
            }
        };
        let rate = if reps > 0 {
            let started = Instant::now();
            for _ in 0..reps {
                for point in &points {
                    let _ = function.evaluate(point)?;
                }
            }
            let secs = started.elapsed().as_secs_f64();
            format!("{:.3e}", (reps as f64 * points.len() as f64) / secs)
        } else {
            String::new()
        };
        println!("{name},{rate},{}", format_f64(max_err));
    }
    Ok(())
}
