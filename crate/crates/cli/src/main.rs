//! Command-line driver for the twisted-photon HOM imaging engine.
//!
//! Exit codes: 0 success, 1 internal/numeric, 2 configuration,
//! 3 I/O or file format, 4 failed selftest or round trip.

mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twistim_core::config::{parse_config, FamilyConfig, SimulationConfig};
use twistim_core::error::Error;
use twistim_core::hom::{
    hom_dip_scan, hom_probabilities_analytic, hom_probabilities_numeric, KSpaceGrid,
};
use twistim_core::imaging::{
    coincidence_port_c, coincidence_port_d, density_port_d, encryption_roundtrip,
    mach_zehnder_density, rescaled_signal, snr_map_coherent, snr_map_two_photon,
    RoundtripThresholds,
};
use twistim_core::mask::PhaseMask;
use twistim_core::pnm;
use twistim_core::states::{StateFamily, TwoPhotonState, SPEED_OF_LIGHT};

#[derive(Parser)]
#[command(
    name = "twistim",
    version,
    about = "Hong-Ou-Mandel coincidence imaging with twisted photon pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print beam-splitter probabilities (analytic and numeric) as CSV
    Probabilities {
        /// State family: product_opposite, product_same, psi_plus,
        /// psi_minus, phi_plus, phi_minus
        #[arg(long)]
        family: Option<String>,
        /// OAM quantum number
        #[arg(long)]
        m: Option<i32>,
        /// Arm delay in seconds
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Sweep the coincidence probability over the arm delay
    DipScan {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        m: Option<i32>,
        /// Scan half-range in units of sigma_z / c
        #[arg(long, default_value_t = 10.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render density, coincidence, re-scaled, and Mach-Zehnder images
    Image {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (defaults to the config's output.dir)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit SNR maps for the two-photon and coherent-state schemes
    Snr {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Independent two-photon measurements N
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        /// Mean photon number of the coherent pulse
        #[arg(long, default_value_t = 10_000.0)]
        photons: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the image-encryption round trip and report recovery accuracy
    EncryptDemo {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Checkerboard cell size in pixels
        #[arg(long, default_value_t = 4)]
        cell: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the built-in phase masks as PGM files
    Masks {
        #[arg(long)]
        out: PathBuf,
        /// Mask raster size in pixels
        #[arg(long, default_value_t = 50)]
        size: usize,
    },
    /// Run the engine invariant suite
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::Format(_) | Error::Io(_) => 3,
        _ => 1,
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<(SimulationConfig, PathBuf), Error> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let base = p
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            Ok((parse_config(&text)?, base))
        }
        None => Ok((SimulationConfig::default(), PathBuf::from("."))),
    }
}

fn apply_state_overrides(
    config: &mut SimulationConfig,
    family: &Option<String>,
    m: Option<i32>,
    tau: Option<f64>,
) -> Result<(), Error> {
    if let Some(name) = family {
        config.state.family = FamilyConfig::parse(name)?;
    }
    if let Some(m) = m {
        config.state.m = m;
    }
    if let Some(tau) = tau {
        config.state.delay_tau = tau;
    }
    config.validate()
}

fn build_state_checked(config: &SimulationConfig) -> Result<TwoPhotonState, Error> {
    let state = config.build_state()?;
    if state.is_null() {
        return Err(Error::config(
            "state",
            format!(
                "{} with m = 0 is the null vector; pick m != 0 or another family",
                state.family().label()
            ),
        ));
    }
    Ok(state)
}

fn prepare_output_dir(config: &SimulationConfig, out: &Option<PathBuf>) -> Result<PathBuf, Error> {
    let dir = out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    std::fs::create_dir_all(&dir)?;
    // every output directory records the effective config and version
    std::fs::write(dir.join("effective_config.json"), config.echo())?;
    std::fs::write(
        dir.join("VERSION.txt"),
        format!("twistim engine {}\n", twistim_core::VERSION),
    )?;
    Ok(dir)
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Probabilities {
            family,
            m,
            tau,
            config,
        } => {
            let (mut config, _) = load_config(&config)?;
            apply_state_overrides(&mut config, &family, m, tau)?;
            let state = build_state_checked(&config)?;
            let mut out = String::from("method,family,m,tau,p_cc,p_dd,p_cd,quadrature_error\n");
            if state.delay_tau() == 0.0 {
                let p = hom_probabilities_analytic(&state)?;
                out.push_str(&format!(
                    "analytic,{},{},{},{},{},{},0\n",
                    state.family().label(),
                    state.m(),
                    state.delay_tau(),
                    p.p_cc,
                    p.p_dd,
                    p.p_cd
                ));
            }
            let p = hom_probabilities_numeric(&state, &KSpaceGrid::default())?;
            out.push_str(&format!(
                "numeric,{},{},{},{},{},{},{:e}\n",
                state.family().label(),
                state.m(),
                state.delay_tau(),
                p.p_cc,
                p.p_dd,
                p.p_cd,
                p.quadrature_error
            ));
            print!("{out}");
            Ok(ExitCode::SUCCESS)
        }

        Command::DipScan {
            family,
            m,
            tau_max,
            points,
            config,
            out,
        } => {
            let (mut config, _) = load_config(&config)?;
            apply_state_overrides(&mut config, &family, m, None)?;
            if points < 2 {
                return Err(Error::config("points", "need at least 2 scan points"));
            }
            let state = build_state_checked(&config)?;
            let sigma_t = config.envelope.sigma_z / SPEED_OF_LIGHT;
            let taus: Vec<f64> = (0..points)
                .map(|i| (2.0 * i as f64 / (points - 1) as f64 - 1.0) * tau_max * sigma_t)
                .collect();
            eprintln!("scanning {points} delays in [-{tau_max}, {tau_max}] sigma_z/c");
            let scan = hom_dip_scan(&state, &taus, &KSpaceGrid::default())?;
            let mut csv = String::from("tau_seconds,tau_sigma_z_over_c,p_cd\n");
            for (tau, p) in scan.delays.iter().zip(&scan.p_cd_values) {
                csv.push_str(&format!("{:.8e},{:.8e},{:.8e}\n", tau, tau / sigma_t, p));
            }
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Image { config, out } => {
            let (config, base) = load_config(&config)?;
            let state = build_state_checked(&config)?;
            if state.family() != StateFamily::ProductOpposite {
                return Err(Error::config(
                    "state.family",
                    "the imaging pipeline runs on the product_opposite state",
                ));
            }
            let dir = prepare_output_dir(&config, &out)?;
            let grid = config.build_sensor()?;
            let params = config.render_params()?;
            let mask = config.build_mask(&base)?;
            let mask_ref = mask.as_ref();

            eprintln!("rendering density (port d)");
            let density = density_port_d(&state, mask_ref, &grid, &params)?;
            eprintln!("rendering coincidence (port d)");
            let coincidence_d = coincidence_port_d(&state, mask_ref, &grid, &params)?;
            eprintln!("rendering coincidence (port c)");
            let coincidence_c = coincidence_port_c(&state, mask_ref, &grid, &params)?;
            eprintln!("rendering re-scaled signal");
            let rescaled = rescaled_signal(&coincidence_d, &density, params.floor)?;
            eprintln!("rendering Mach-Zehnder baseline");
            let flat = PhaseMask::uniform(0.0).expect("constant mask");
            let mz =
                mach_zehnder_density(state.mode(), mask_ref.unwrap_or(&flat), &grid, &params)?;

            let csv = config.output.csv;
            let pgm = config.output.pgm;
            pnm::write_image_set(&dir, "density_d", &density, csv, pgm)?;
            pnm::write_image_set(&dir, "coincidence_d", &coincidence_d, csv, pgm)?;
            pnm::write_image_set(&dir, "coincidence_c", &coincidence_c, csv, pgm)?;
            pnm::write_image_set(&dir, "rescaled_d", &rescaled, csv, pgm)?;
            pnm::write_image_set(&dir, "mach_zehnder", &mz, csv, pgm)?;
            eprintln!("wrote image set to {}", dir.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Snr {
            config,
            shots,
            photons,
            out,
        } => {
            let (config, base) = load_config(&config)?;
            let state = build_state_checked(&config)?;
            let dir = prepare_output_dir(&config, &out)?;
            let grid = config.build_sensor()?;
            let params = config.render_params()?;
            let mask = config.build_mask(&base)?;
            let mask_ref = mask.as_ref();

            eprintln!("rendering coincidence for the two-photon SNR map");
            let coincidence = coincidence_port_d(&state, mask_ref, &grid, &params)?;
            let snr_tps = snr_map_two_photon(&coincidence, shots)?;
            eprintln!("rendering Mach-Zehnder density for the coherent SNR map");
            let flat = PhaseMask::uniform(0.0).expect("constant mask");
            let mz =
                mach_zehnder_density(state.mode(), mask_ref.unwrap_or(&flat), &grid, &params)?;
            let snr_cs = snr_map_coherent(&mz, photons)?;

            let csv = config.output.csv;
            let pgm = config.output.pgm;
            pnm::write_image_set(&dir, "snr_two_photon", &snr_tps, csv, pgm)?;
            pnm::write_image_set(&dir, "snr_coherent", &snr_cs, csv, pgm)?;
            eprintln!("wrote SNR maps to {}", dir.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::EncryptDemo { config, cell, out } => {
            let (config, _) = load_config(&config)?;
            let state = build_state_checked(&config)?;
            if cell == 0 {
                return Err(Error::config("cell", "cell size must be >= 1 pixel"));
            }
            let dir = prepare_output_dir(&config, &out)?;
            let grid = config.build_sensor()?;
            let params = config.render_params()?;
            // cells aligned to the pixel lattice so every pixel is pure
            let origin = (
                grid.center.0 - 0.5 * grid.n_x as f64 * grid.pitch,
                grid.center.1 - 0.5 * grid.n_y as f64 * grid.pitch,
            );
            let mask =
                PhaseMask::checkerboard(cell as f64 * grid.pitch, std::f64::consts::PI, origin)?;

            eprintln!("running encryption round trip (cell = {cell} px)");
            let report = encryption_roundtrip(
                &state,
                &mask,
                &grid,
                &params,
                &RoundtripThresholds::default(),
            )?;

            let csv = config.output.csv;
            let pgm = config.output.pgm;
            pnm::write_image_set(&dir, "density_d", &report.density, csv, pgm)?;
            pnm::write_image_set(&dir, "coincidence_d", &report.coincidence, csv, pgm)?;
            pnm::write_image_set(&dir, "rescaled_d", &report.rescaled, csv, pgm)?;
            write_bitmap(&dir, "source_bits", &report.source_bits, &grid)?;
            write_bitmap(&dir, "recovered_bits", &report.recovered_bits, &grid)?;

            let verdict = if report.passed { "PASS" } else { "FAIL" };
            let text = format!(
                "encryption round trip: {verdict}\n\
                 recovery_accuracy={:.6}\n\
                 density_max_rel_deviation={:.3e}\n\
                 I2={:.8e}{:+.8e}i\n\
                 trivially_uniform={}\n\
                 degenerate_overlap={}\n",
                report.accuracy,
                report.density_max_rel_deviation,
                report.i2.re,
                report.i2.im,
                report.trivially_uniform,
                report.degenerate_overlap,
            );
            std::fs::write(dir.join("report.txt"), &text)?;
            print!("{text}");
            if report.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(4))
            }
        }

        Command::Masks { out, size } => {
            if size == 0 {
                return Err(Error::config("size", "mask size must be >= 1"));
            }
            std::fs::create_dir_all(&out)?;
            for (name, pixels) in builtin_masks(size) {
                let doc = pnm::encode_pgm_p2(size, size, &pixels);
                std::fs::write(out.join(format!("{name}.pgm")), doc)?;
                eprintln!("wrote {name}.pgm");
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Selftest => {
            let failures = selftest::run_all();
            if failures == 0 {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(4))
            }
        }
    }
}

fn write_bitmap(
    dir: &Path,
    stem: &str,
    bits: &[bool],
    grid: &twistim_core::imaging::SensorGrid,
) -> Result<(), Error> {
    let pixels: Vec<u8> = bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
    let doc = pnm::encode_pgm_p2(grid.n_x, grid.n_y, &pixels);
    std::fs::write(dir.join(format!("{stem}.pgm")), doc)?;
    Ok(())
}

/// The built-in demo masks, rasterized to 8-bit gray (255 = pi).
fn builtin_masks(size: usize) -> Vec<(&'static str, Vec<u8>)> {
    let mut masks = Vec::new();

    let cell = (size / 12).max(2);
    let checker: Vec<u8> = (0..size * size)
        .map(|idx| {
            let (i, j) = (idx % size, idx / size);
            if (i / cell + j / cell) % 2 == 1 {
                255
            } else {
                0
            }
        })
        .collect();
    masks.push(("checkerboard", checker));

    let half = 0.5 * (size as f64 - 1.0);
    let sector: Vec<u8> = (0..size * size)
        .map(|idx| {
            let (i, j) = (idx % size, idx / size);
            let (x, y) = (i as f64 - half, half - j as f64);
            let phi = y.atan2(x).rem_euclid(std::f64::consts::TAU);
            if phi < 0.5 * std::f64::consts::PI {
                255
            } else {
                0
            }
        })
        .collect();
    masks.push(("sector", sector));

    masks.push(("uniform", vec![0u8; size * size]));

    // seeded block noise
    let mut state = 0x7715_da7au64;
    let mut next = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    let block = (size / 10).max(2);
    let blocks_per_row = size.div_ceil(block);
    let block_bits: Vec<bool> = (0..blocks_per_row * blocks_per_row)
        .map(|_| next() & 1 == 1)
        .collect();
    let random: Vec<u8> = (0..size * size)
        .map(|idx| {
            let (i, j) = (idx % size, idx / size);
            if block_bits[(j / block) * blocks_per_row + i / block] {
                255
            } else {
                0
            }
        })
        .collect();
    masks.push(("random_blocks", random));

    masks
}
