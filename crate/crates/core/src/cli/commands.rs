use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use trajsign::classify::{
    baseline_1nn, learning_curve, load_samples, mean_std, protocol_table, read_manifest,
    read_split, run_protocol, train_bank_detailed, write_manifest, write_split, ProtocolSummary,
    Sample, SampleRecord,
};
use trajsign::datagen::{
    generate_frame_sequence, generate_samples, sample_path, FrameLayout, GenSpec,
};
use trajsign::features::{assemble, interpolate, write_features};
use trajsign::frames::read_video_dir;
use trajsign::imaging::{detect_start_frame, track_hand};
use trajsign::model_file::{read_bank, write_bank};
use trajsign::{Error, FeatureMatrix, Result};

use super::args::{
    Cli, Command, CurveArgs, EvalArgs, ExtractArgs, Partition, SplitKind, SynthArgs, TableArgs,
    TrainArgs,
};
use super::run_manifest::{with_header, RunManifest};

pub fn dispatch(cli: &Cli, manifest: &mut RunManifest) -> Result<ExitCode> {
    let report_csv = cli.report_csv.as_deref();
    match &cli.command {
        Command::Extract(a) => extract(a, report_csv, manifest),
        Command::Synth(a) => synth(
            a,
            cli.seed.unwrap_or(GenSpec::default().seed),
            report_csv,
            manifest,
        ),
        Command::Train(a) => train(a, cli.seed.unwrap_or(0), report_csv, manifest),
        Command::Eval(a) => eval(a, cli.seed.unwrap_or(0), report_csv, manifest),
        Command::Curve(a) => curve(a, cli.seed.unwrap_or(0), report_csv, manifest),
        Command::Table(a) => table(a, cli.seed.unwrap_or(0), report_csv, manifest),
        Command::Replay(_) => unreachable!("replay is resolved before dispatch"),
    }
    .map(|()| ExitCode::SUCCESS)
    .or_else(|e| match e {
        CommandError::Partial(n) => {
            eprintln!("{n} video(s) failed; see the error log");
            Ok(ExitCode::from(4))
        }
        CommandError::Fatal(e) => Err(e),
    })
}

enum CommandError {
    /// Extraction finished but this many videos failed.
    Partial(usize),
    Fatal(Error),
}

impl<E: Into<Error>> From<E> for CommandError {
    fn from(e: E) -> Self {
        CommandError::Fatal(e.into())
    }
}

type CmdResult = std::result::Result<(), CommandError>;

fn write_artifact(path: &Path, manifest: &RunManifest, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, with_header(&manifest.header(), body))?;
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".run.json");
    PathBuf::from(s)
}

/// `(sign, subject, repetition)` from a `sNN_pNN_rNN` directory name.
pub fn parse_video_name(name: &str) -> Option<(u32, u32, u32)> {
    let mut parts = name.split('_');
    let mut field = |prefix: char| -> Option<u32> {
        let digits = parts.next()?.strip_prefix(prefix)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok().filter(|&v| v >= 1)
    };
    let parsed = (field('s')?, field('p')?, field('r')?);
    parts.next().is_none().then_some(parsed)
}

fn video_dirs(input: &Path) -> Result<Vec<PathBuf>> {
    let is_video = |p: &Path| {
        p.file_name()
            .and_then(|n| n.to_str())
            .and_then(parse_video_name)
            .is_some()
    };
    if is_video(input) {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(input)
        .map_err(trajsign::Error::at(input))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no video directories under {}",
            input.display()
        )));
    }
    Ok(dirs)
}

fn extract_video(dir: &Path, a: &ExtractArgs) -> Result<FeatureMatrix> {
    let frames = read_video_dir(dir)?;
    let cfg = a.track_config();
    let start = detect_start_frame(
        &frames,
        cfg.diff_threshold,
        cfg.area_threshold_for(&frames[0]),
    )?;
    let stats = track_hand(&frames, start, &cfg)?;
    let raw = assemble(&stats, frames[0].width(), frames[0].height(), a.feature_set)?;
    interpolate(&raw, a.length)
}

fn extract(a: &ExtractArgs, report_csv: Option<&Path>, manifest: &mut RunManifest) -> CmdResult {
    let manifest_path = a
        .manifest
        .clone()
        .unwrap_or_else(|| a.out.join("manifest.csv"));
    let error_log = a
        .error_log
        .clone()
        .unwrap_or_else(|| a.out.join("errors.log"));
    manifest.inputs.push(a.input.clone());
    manifest
        .outputs
        .extend([a.out.clone(), manifest_path.clone(), error_log.clone()]);
    let dirs = video_dirs(&a.input)?;
    fs::create_dir_all(&a.out)?;

    let work = |dir: &PathBuf| -> (String, Result<SampleRecord>) {
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let Some((sign_code, subject_id, repetition)) = parse_video_name(&name) else {
            return (
                name,
                Err(Error::InvalidConfig(
                    "directory name is not sNN_pNN_rNN".into(),
                )),
            );
        };
        let result = extract_video(dir, a).and_then(|m| {
            let path = a.out.join(format!("{name}.csv"));
            write_features(&path, &m)?;
            Ok(SampleRecord {
                sample_id: name.clone(),
                sign_code,
                subject_id,
                repetition,
                feature_path: path,
            })
        });
        (name, result)
    };
    #[cfg(feature = "parallel")]
    let results: Vec<(String, Result<SampleRecord>)> = dirs.par_iter().map(work).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(String, Result<SampleRecord>)> = dirs.iter().map(work).collect();

    let mut records = if manifest_path.exists() {
        read_manifest(&manifest_path)?
    } else {
        Vec::new()
    };
    let mut log = String::new();
    let mut report = String::from("sample_id,status,message\n");
    let mut failures = 0;
    for (name, r) in results {
        match r {
            Ok(rec) => {
                records.retain(|old| old.sample_id != rec.sample_id);
                records.push(rec);
                writeln!(report, "{name},ok,").unwrap();
            }
            Err(e) => {
                failures += 1;
                writeln!(log, "{name}: {e}").unwrap();
                writeln!(
                    report,
                    "{name},failed,\"{}\"",
                    e.to_string().replace('"', "'")
                )
                .unwrap();
            }
        }
    }
    records.sort_by(|x, y| x.sample_id.cmp(&y.sample_id));
    write_manifest(&manifest_path, &records, &manifest.header())?;
    write_artifact(&error_log, manifest, &log)?;
    if let Some(p) = report_csv {
        write_artifact(p, manifest, &report)?;
    }
    println!(
        "extracted {} of {} video(s) into {}",
        dirs.len() - failures,
        dirs.len(),
        a.out.display()
    );
    manifest.finish(&a.out.join("run.json"))?;
    if failures > 0 {
        return Err(CommandError::Partial(failures));
    }
    Ok(())
}

fn synth(
    a: &SynthArgs,
    seed: u64,
    report_csv: Option<&Path>,
    manifest: &mut RunManifest,
) -> CmdResult {
    let spec = GenSpec {
        num_classes: a.classes,
        num_subjects: a.subjects,
        reps_per_subject: a.reps,
        frames: (a.min_frames, a.max_frames),
        noise_sigma: a.noise,
        subject_offset_sigma: a.subject_offset,
        subject_scale_range: (a.scale_min, a.scale_max),
        time_warp: a.time_warp,
        rep_time_warp: a.rep_time_warp,
        subject_pause: a.subject_pause,
        feature_set: a.feature_set,
        seed,
        ..GenSpec::default()
    };
    manifest.seeds.push(seed);
    manifest.outputs.push(a.out.clone());
    let samples = generate_samples(&spec)?;
    fs::create_dir_all(a.out.join("features"))?;
    let mut records = Vec::with_capacity(samples.len());
    for s in samples {
        let path = a.out.join(&s.record.feature_path);
        write_features(&path, &s.features)?;
        records.push(SampleRecord {
            feature_path: path,
            ..s.record
        });
    }
    write_manifest(&a.out.join("manifest.csv"), &records, &manifest.header())?;

    let mut rendered = 0;
    if let Some(n) = a.frames.filter(|&n| n > 0) {
        let layout = FrameLayout {
            width: a.frame_width,
            height: a.frame_height,
            radius: a.radius,
        };
        let n = n.min(records.len());
        for i in 0..n {
            let r = &records[i * records.len() / n];
            let points = sample_path(&spec, r.sign_code, r.subject_id, r.repetition);
            generate_frame_sequence(&points, &layout, &a.out.join("videos").join(&r.sample_id))?;
            rendered += 1;
        }
    }
    if let Some(p) = report_csv {
        let mut body = String::from("sign_code,samples\n");
        for code in 1..=spec.num_classes {
            writeln!(
                body,
                "{code},{}",
                records.iter().filter(|r| r.sign_code == code).count()
            )
            .unwrap();
        }
        write_artifact(p, manifest, &body)?;
    }
    println!(
        "wrote {} samples ({} rendered as frames) to {}",
        records.len(),
        rendered,
        a.out.display()
    );
    manifest.finish(&a.out.join("run.json"))?;
    Ok(())
}

fn load(path: &Path, manifest: &mut RunManifest) -> Result<(Vec<SampleRecord>, Vec<Sample>)> {
    manifest.inputs.push(path.to_path_buf());
    let records = read_manifest(path)?;
    let samples = load_samples(&records)?;
    Ok((records, samples))
}

fn select(samples: &[Sample], idx: &[usize]) -> Vec<Sample> {
    idx.iter().map(|&i| samples[i].clone()).collect()
}

fn train(
    a: &TrainArgs,
    seed: u64,
    report_csv: Option<&Path>,
    manifest: &mut RunManifest,
) -> CmdResult {
    let split_out = a.split_out.clone().unwrap_or_else(|| {
        let mut s = a.model_out.as_os_str().to_owned();
        s.push(".split.csv");
        PathBuf::from(s)
    });
    manifest.seeds.push(seed);
    manifest
        .outputs
        .extend([a.model_out.clone(), split_out.clone()]);
    let (records, samples) = load(&a.manifest, manifest)?;
    let protocol = a.split.protocol();
    let split = protocol.split(&samples, seed)?;
    let config = a.model.config(seed);
    let (bank, infos) = train_bank_detailed(&select(&samples, &split.train), &config)?;

    write_bank(&a.model_out, &bank, &manifest.header())?;
    write_split(&split_out, &records, &split, &manifest.header())?;
    if let Some(p) = report_csv {
        let mut body =
            String::from("sign_code,sequences,iterations,converged,final_loglik,resets\n");
        for t in &infos {
            let last = t.trace.last().copied().unwrap_or(f64::NAN);
            writeln!(
                body,
                "{},{},{},{},{},{}",
                t.sign_code,
                t.num_sequences,
                t.trace.len().saturating_sub(1),
                t.converged,
                last,
                t.resets
            )
            .unwrap();
        }
        write_artifact(p, manifest, &body)?;
    }
    let unconverged = infos.iter().filter(|t| !t.converged).count();
    println!(
        "trained {} models ({protocol}, seed {seed}): {} train / {} test samples; {unconverged} hit the iteration cap",
        bank.len(),
        split.train.len(),
        split.test.len()
    );
    manifest.finish(&sidecar(&a.model_out))?;
    Ok(())
}

fn eval(
    a: &EvalArgs,
    seed: u64,
    report_csv: Option<&Path>,
    manifest: &mut RunManifest,
) -> CmdResult {
    manifest.inputs.push(a.model.clone());
    manifest.inputs.extend(a.split_file.clone());
    manifest.outputs.push(a.out.clone());
    manifest.seeds.push(seed);
    let bank = read_bank(&a.model)?;
    let (records, samples) = load(&a.manifest, manifest)?;
    let (idx, descriptor) = match &a.split_file {
        Some(path) => {
            let split = read_split(path, &records)?;
            let idx = match a.partition {
                Partition::Test => split.test,
                Partition::Train => split.train,
                Partition::All => (0..records.len()).collect(),
            };
            let part = format!("{:?}", a.partition).to_lowercase();
            (idx, format!("{part} partition of {}", path.display()))
        }
        None => ((0..records.len()).collect(), "all samples".to_string()),
    };
    if let Some(s) = samples.first().filter(|s| s.features.dims() != bank.dims()) {
        return Err(Error::DimensionMismatch {
            expected: bank.dims(),
            found: s.features.dims(),
        }
        .into());
    }
    let report = trajsign::classify::evaluate(&bank, &select(&samples, &idx))?
        .with_descriptor(descriptor, seed);

    fs::create_dir_all(&a.out)?;
    write_artifact(&a.out.join("summary.txt"), manifest, &report.summary())?;
    write_artifact(
        &a.out.join("per_class.csv"),
        manifest,
        &report.per_class_csv(),
    )?;
    write_artifact(
        &a.out.join("confusion.csv"),
        manifest,
        &report.confusion_csv(),
    )?;
    if let Some(p) = report_csv {
        let mut body = report.per_class_csv();
        writeln!(
            body,
            "all,{},{},{:.4}",
            report.total(),
            report.correct(),
            report.accuracy()
        )
        .unwrap();
        write_artifact(p, manifest, &body)?;
    }
    print!("{}", report.summary());
    manifest.finish(&a.out.join("run.json"))?;
    Ok(())
}

fn curve(
    a: &CurveArgs,
    seed: u64,
    report_csv: Option<&Path>,
    manifest: &mut RunManifest,
) -> CmdResult {
    manifest
        .seeds
        .extend((0..a.repeats as u64).map(|r| seed.wrapping_add(r)));
    manifest.outputs.extend(a.out.clone());
    let (_, samples) = load(&a.manifest, manifest)?;
    let points = learning_curve(
        &samples,
        &a.fractions,
        a.repeats,
        &a.model.config(seed),
        seed,
    )?;
    let mut body = String::from("fraction,mean_accuracy,std_accuracy\n");
    for p in &points {
        writeln!(body, "{},{:.4},{:.4}", p.fraction, p.mean, p.std).unwrap();
    }
    for path in a.out.as_deref().into_iter().chain(report_csv) {
        write_artifact(path, manifest, &body)?;
    }
    println!("{:>9}  accuracy % mean (±std)", "train %");
    for p in &points {
        println!("{:>9.1}  {:.2} (±{:.2})", 100.0 * p.fraction, p.mean, p.std);
    }
    if let Some(out) = &a.out {
        manifest.finish(&sidecar(out))?;
    }
    Ok(())
}

fn table(
    a: &TableArgs,
    seed: u64,
    report_csv: Option<&Path>,
    manifest: &mut RunManifest,
) -> CmdResult {
    manifest
        .seeds
        .extend((0..a.runs as u64).map(|r| seed.wrapping_add(r)));
    manifest.outputs.extend(a.out.clone());
    let (_, samples) = load(&a.manifest, manifest)?;
    let kinds = if a.protocols.is_empty() {
        vec![
            SplitKind::Random,
            SplitKind::SubjectDependent,
            SplitKind::SubjectIndependent,
        ]
    } else {
        a.protocols.clone()
    };
    let config = a.model.config(seed);
    let mut hmm_rows = Vec::new();
    let mut nn_rows = Vec::new();
    for kind in kinds {
        let protocol = a.split.protocol_of(kind);
        hmm_rows.push(run_protocol(&samples, &protocol, a.runs, &config, seed)?);
        if a.baseline {
            let reports = (0..a.runs as u64)
                .map(|r| {
                    let s = seed.wrapping_add(r);
                    let split = protocol.split(&samples, s)?;
                    Ok(baseline_1nn(
                        &select(&samples, &split.train),
                        &select(&samples, &split.test),
                    )?
                    .with_descriptor(protocol.to_string(), s))
                })
                .collect::<Result<Vec<_>>>()?;
            let accuracies: Vec<f64> = reports.iter().map(|r| r.accuracy()).collect();
            let (mean, std) = mean_std(&accuracies);
            nn_rows.push(ProtocolSummary {
                protocol,
                accuracies,
                mean,
                std,
                reports,
            });
        }
    }
    let mut text = format!(
        "HMM ({} states, {} mixtures)\n{}",
        config.num_states,
        config.num_mixtures,
        protocol_table(&hmm_rows)
    );
    if a.baseline {
        write!(text, "\n1-NN baseline\n{}", protocol_table(&nn_rows)).unwrap();
    }
    let mut csv = String::from("method,protocol,run,seed,accuracy\n");
    for (method, rows) in [("hmm", &hmm_rows), ("1nn", &nn_rows)] {
        for row in rows {
            for (r, rep) in row.reports.iter().enumerate() {
                writeln!(
                    csv,
                    "{method},{},{r},{},{:.4}",
                    row.protocol,
                    rep.seed,
                    rep.accuracy()
                )
                .unwrap();
            }
        }
    }
    if let Some(out) = &a.out {
        write_artifact(out, manifest, &text)?;
    }
    if let Some(p) = report_csv {
        write_artifact(p, manifest, &csv)?;
    }
    print!("{text}");
    if let Some(out) = &a.out {
        manifest.finish(&sidecar(out))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn video_names() {
        assert_eq!(parse_video_name("s01_p12_r05"), Some((1, 12, 5)));
        assert_eq!(parse_video_name("s20_p01_r01"), Some((20, 1, 1)));
        assert_eq!(parse_video_name("s00_p01_r01"), None);
        assert_eq!(parse_video_name("s1_p1"), None);
        assert_eq!(parse_video_name("s01_p01_r01_x"), None);
        assert_eq!(parse_video_name("s0a_p01_r01"), None);
        assert_eq!(parse_video_name("video"), None);
    }
}
