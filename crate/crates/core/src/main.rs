use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser as ClapParser, Subcommand, ValueEnum};

use actionparse::baselines::{no_context_parse, sliding_window_labels};
use actionparse::cli_io::{
    self, load_annotations, load_config, load_features, load_gen_spec, load_model, save_model,
    save_parse, train_pipeline, ConfigFile,
};
use actionparse::core_types::{validate_parse, Parse};
use actionparse::datagen::generate;
use actionparse::dp_parser::{
    brute_force_parse, parse_backward, parse_counted, parse_forward, TableScorer,
};
use actionparse::evaluation::{
    parse_to_frame_labels, per_frame_accuracy, per_frame_accuracy_excluding_background,
};
use actionparse::Error;

#[derive(ClapParser)]
#[command(
    name = "actionparse",
    version,
    about = "Temporal action parsing engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineMethod {
    Sliding,
    Nocontext,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a generator spec
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the two-layer pipeline on a dataset directory
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Parse one feature file with a trained model
    Parse {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        penalty: Option<f64>,
    },
    /// Per-frame accuracy between two segmentation files
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        exclude_background: bool,
    },
    /// Run a comparison method
    Baseline {
        #[arg(long, value_enum)]
        method: BaselineMethod,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        penalty: Option<f64>,
    },
    /// Cross-check the DP parser against the brute-force oracle
    Verify {
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoValidParse { .. } | Error::SequenceTooShort { .. } => 3,
        Error::InvalidConfig(_) | Error::TooFewExamples { .. } => 4,
        _ => 2,
    }
}

fn run(command: Command) -> actionparse::Result<()> {
    match command {
        Command::Synth { spec, out } => {
            let spec_file = load_gen_spec(&spec)?;
            let data = generate(&spec_file.gen_spec())?;
            let label_space = spec_file.label_space()?;
            cli_io::write_dataset(&out, &data, &label_space)?;
            println!("wrote {} sequences to {}", data.len(), out.display());
            Ok(())
        }
        Command::Train {
            data,
            config,
            model_out,
        } => {
            let config = match config {
                Some(path) => load_config(&path)?,
                None => ConfigFile::default(),
            };
            let corpus = cli_io::load_dataset(&data)?;
            let pipeline =
                train_pipeline(&corpus, &config.parser_config(), &config.train_config())?;
            for note in &pipeline.skipped {
                eprintln!("warning: {note}");
            }
            save_model(&model_out, &pipeline, &config)?;
            println!(
                "trained on {} sequences -> {}",
                corpus.items.len(),
                model_out.display()
            );
            Ok(())
        }
        Command::Parse {
            features,
            model,
            out,
            penalty,
        } => {
            let seq = load_features(&features)?;
            let (pipeline, config) = load_model(&model)?;
            let mut parser_config = config.parser_config();
            if let Some(p) = penalty {
                parser_config.segment_penalty = p;
            }
            let (parse, _) = parse_counted(
                &seq,
                &pipeline.first_layer,
                &pipeline.second_layer,
                &parser_config,
            )?;
            let report = validate_parse(&parse, seq.len(), &parser_config);
            if !report.is_valid() {
                return Err(Error::InvalidParse(report.violations.join("; ")));
            }
            save_parse(&out, &parse, pipeline.first_layer.label_space())?;
            println!(
                "{} segments, total score {:.6}",
                parse.num_segments(),
                parse.total_score
            );
            Ok(())
        }
        Command::Eval {
            pred,
            truth,
            exclude_background,
        } => {
            let (pred_parse, ls) = load_annotations(&pred)?;
            let (truth_parse, _) = load_annotations(&truth)?;
            let p = parse_to_frame_labels(&pred_parse)?;
            let t = parse_to_frame_labels(&truth_parse)?;
            let accuracy = if exclude_background {
                per_frame_accuracy_excluding_background(&p, &t, ls.background_index())?
            } else {
                per_frame_accuracy(&p, &t)?
            };
            println!("per-frame accuracy: {accuracy:.6}");
            Ok(())
        }
        Command::Baseline {
            method,
            features,
            model,
            out,
            window,
            stride,
            penalty,
        } => {
            let seq = load_features(&features)?;
            let (pipeline, config) = load_model(&model)?;
            match method {
                BaselineMethod::Sliding => {
                    let window = window.unwrap_or(75);
                    let stride = stride.unwrap_or_else(|| (window / 2).max(1));
                    let labels =
                        sliding_window_labels(&seq, &pipeline.first_layer, window, stride)?;
                    let parse = labels_to_parse(&labels);
                    save_parse(&out, &parse, pipeline.first_layer.label_space())?;
                }
                BaselineMethod::Nocontext => {
                    let mut parser_config = config.parser_config();
                    if let Some(p) = penalty {
                        parser_config.segment_penalty = p;
                    }
                    let parse = no_context_parse(&seq, &pipeline.first_layer, &parser_config)?;
                    save_parse(&out, &parse, pipeline.first_layer.label_space())?;
                }
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Verify { cases } => {
            let (l_min, l_max, m) = (2usize, 6usize, 3usize);
            let mut failures = 0usize;
            for seed in 0..cases as u64 {
                let frame_count = 8 + (seed as usize * 13) % 23; // 8..=30
                let scorer = TableScorer::<f64>::random(frame_count, l_min, l_max, m, seed);
                let tables = parse_forward(&scorer, frame_count, l_min, l_max)?;
                let dp = parse_backward(&tables, l_min, l_max)?;
                let bf = brute_force_parse(&scorer, frame_count, l_min, l_max)?;
                if (dp.total_score - bf.total_score).abs() > 1e-9 {
                    failures += 1;
                    println!(
                        "FAIL seed {seed}: dp {} vs brute force {}",
                        dp.total_score, bf.total_score
                    );
                }
            }
            println!(
                "verify: {}/{cases} instances match the brute-force oracle",
                cases - failures
            );
            if failures > 0 {
                return Err(Error::InvalidParse(format!(
                    "{failures} instances diverged from the oracle"
                )));
            }
            Ok(())
        }
    }
}

/// Collapses per-frame labels into maximal constant runs.
fn labels_to_parse(labels: &[usize]) -> Parse<f64> {
    let mut breakpoints = vec![0usize];
    let mut seg_labels = Vec::new();
    for f in 1..labels.len() {
        if labels[f] != labels[f - 1] {
            breakpoints.push(f);
            seg_labels.push(labels[f - 1]);
        }
    }
    breakpoints.push(labels.len());
    seg_labels.push(*labels.last().unwrap());
    Parse::new(breakpoints, seg_labels, 0.0)
}
