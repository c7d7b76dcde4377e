//! C ABI over `med_bandit`.
//!
//! Every fallible entry point returns a [`MedStatus`]; on failure the message is
//! available from [`med_last_error`] on the same thread. Handles are opaque and
//! must be released with their matching `_free` function. Strings returned to
//! the caller are released with [`med_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use med_bandit::config::parse_config;
use med_bandit::dist::FiniteDistribution;
use med_bandit::dmin::{dmin, SolverParams};
use med_bandit::experiment::{run_experiment, write_csv, RunOptions};
use med_bandit::rng::SeedSpec;
use med_bandit::sim::{regret, Environment, Episode};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Domain = 4,
    Io = 5,
    Panic = 6,
}

/// A validated finite distribution.
pub struct MedDistribution {
    inner: FiniteDistribution,
}

/// A bandit episode that owns its environment and policy.
pub struct MedEpisode {
    inner: Episode<'static>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MedStatus, String);

impl From<med_bandit::Error> for Failure {
    fn from(e: med_bandit::Error) -> Self {
        use med_bandit::Error as E;
        let status = match &e {
            E::Domain(_) => MedStatus::Domain,
            E::Config { .. } => MedStatus::InvalidConfig,
            E::InvalidDistribution(_) | E::EmptyState | E::Input(_) => MedStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: MedStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MedStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MedStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            MedStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(MedStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(MedStatus::NullPointer, format!("`{name}` is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(MedStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MedStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn med_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn med_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solves `D_min(F, mu)` for `F` given by `len` support points on `[-1, 0]`
/// and their probabilities, with `r` Newton iterations started at `nu0`.
///
/// # Safety
/// `points` and `probs` must point to `len` readable doubles; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn med_dmin(
    points: *const f64,
    probs: *const f64,
    len: usize,
    mu: f64,
    r: u32,
    nu0: f64,
    out_value: *mut f64,
    out_nu_star: *mut f64,
) -> MedStatus {
    guard(|| {
        let value = out(out_value, "out_value")?;
        let nu_star = out(out_nu_star, "out_nu_star")?;
        let f = FiniteDistribution::new(
            slice(points, len, "points")?.to_vec(),
            slice(probs, len, "probs")?.to_vec(),
        )?;
        let res = dmin(&f, mu, SolverParams::new(r, nu0)?)?;
        *value = res.value;
        *nu_star = res.nu_star;
        Ok(())
    })
}

/// # Safety
/// `points` and `probs` must point to `len` readable doubles; `out_handle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn med_distribution_new(
    points: *const f64,
    probs: *const f64,
    len: usize,
    out_handle: *mut *mut MedDistribution,
) -> MedStatus {
    guard(|| {
        let handle = out(out_handle, "out_handle")?;
        let inner = FiniteDistribution::new(
            slice(points, len, "points")?.to_vec(),
            slice(probs, len, "probs")?.to_vec(),
        )?;
        *handle = Box::into_raw(Box::new(MedDistribution { inner }));
        Ok(())
    })
}

/// # Safety
/// `dist` must be a live handle; `out_mean` must be writable.
#[no_mangle]
pub unsafe extern "C" fn med_distribution_mean(
    dist: *const MedDistribution,
    out_mean: *mut f64,
) -> MedStatus {
    guard(|| {
        let d = dist
            .as_ref()
            .ok_or_else(|| fail(MedStatus::NullPointer, "`dist` is null"))?;
        *out(out_mean, "out_mean")? = d.inner.mean();
        Ok(())
    })
}

/// As [`med_dmin`], for a distribution handle.
///
/// # Safety
/// `dist` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn med_distribution_dmin(
    dist: *const MedDistribution,
    mu: f64,
    r: u32,
    nu0: f64,
    out_value: *mut f64,
    out_nu_star: *mut f64,
) -> MedStatus {
    guard(|| {
        let d = dist
            .as_ref()
            .ok_or_else(|| fail(MedStatus::NullPointer, "`dist` is null"))?;
        let value = out(out_value, "out_value")?;
        let nu_star = out(out_nu_star, "out_nu_star")?;
        let res = dmin(&d.inner, mu, SolverParams::new(r, nu0)?)?;
        *value = res.value;
        *nu_star = res.nu_star;
        Ok(())
    })
}

/// # Safety
/// `dist` must be NULL or a live handle from [`med_distribution_new`].
#[no_mangle]
pub unsafe extern "C" fn med_distribution_free(dist: *mut MedDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Creates an episode for policy `policy_index` of a TOML experiment config,
/// seeded by `(master_seed, run_index, policy_index)` like the CLI runs.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out_handle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn med_episode_new(
    config_toml: *const c_char,
    policy_index: usize,
    master_seed: u64,
    run_index: u64,
    out_handle: *mut *mut MedEpisode,
) -> MedStatus {
    guard(|| {
        let handle = out(out_handle, "out_handle")?;
        let cfg = parse_config(text(config_toml, "config_toml")?, "<ffi>")?;
        let policy = cfg.policies.get(policy_index).ok_or_else(|| {
            fail(
                MedStatus::InvalidArgument,
                format!(
                    "policy_index {policy_index} out of range ({} policies)",
                    cfg.policies.len()
                ),
            )
        })?;
        let env = Environment::new(cfg.arms.clone())?;
        let seed = SeedSpec::new(master_seed, run_index, policy_index as u64);
        let inner = Episode::owned(env, &policy.config, seed);
        *handle = Box::into_raw(Box::new(MedEpisode { inner }));
        Ok(())
    })
}

/// Plays one round. Either output may be NULL.
///
/// # Safety
/// `episode` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn med_episode_step(
    episode: *mut MedEpisode,
    out_arm: *mut usize,
    out_reward: *mut f64,
) -> MedStatus {
    guard(|| {
        let ep = out(episode, "episode")?;
        let rec = ep.inner.step()?;
        if let Some(a) = out_arm.as_mut() {
            *a = rec.arm;
        }
        if let Some(r) = out_reward.as_mut() {
            *r = rec.reward;
        }
        Ok(())
    })
}

/// Number of arms, or 0 for a NULL handle.
///
/// # Safety
/// `episode` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn med_episode_arms(episode: *const MedEpisode) -> usize {
    episode.as_ref().map_or(0, |e| e.inner.environment().k())
}

/// Writes the pull counts of the first `min(len, arms)` arms.
///
/// # Safety
/// `episode` must be a live handle; `out_counts` must hold `len` writable `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn med_episode_counts(
    episode: *const MedEpisode,
    out_counts: *mut u64,
    len: usize,
) -> MedStatus {
    guard(|| {
        let ep = episode
            .as_ref()
            .ok_or_else(|| fail(MedStatus::NullPointer, "`episode` is null"))?;
        let counts = ep.inner.counts();
        let n = len.min(counts.len());
        if n > 0 {
            if out_counts.is_null() {
                return Err(fail(MedStatus::NullPointer, "`out_counts` is null"));
            }
            std::slice::from_raw_parts_mut(out_counts, n).copy_from_slice(&counts[..n]);
        }
        Ok(())
    })
}

/// Pseudo-regret so far, from the exact arm means.
///
/// # Safety
/// `episode` must be a live handle; `out_regret` must be writable.
#[no_mangle]
pub unsafe extern "C" fn med_episode_regret(
    episode: *const MedEpisode,
    out_regret: *mut f64,
) -> MedStatus {
    guard(|| {
        let ep = episode
            .as_ref()
            .ok_or_else(|| fail(MedStatus::NullPointer, "`episode` is null"))?;
        *out(out_regret, "out_regret")? = regret(ep.inner.environment(), &ep.inner.counts());
        Ok(())
    })
}

/// # Safety
/// `episode` must be NULL or a live handle from [`med_episode_new`].
#[no_mangle]
pub unsafe extern "C" fn med_episode_free(episode: *mut MedEpisode) {
    if !episode.is_null() {
        drop(Box::from_raw(episode));
    }
}

/// Runs a whole TOML experiment and returns its CSV text in `*out_csv`
/// (free with [`med_string_free`]). `workers` of 0 is treated as 1.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out_csv` must be writable.
#[no_mangle]
pub unsafe extern "C" fn med_experiment_run(
    config_toml: *const c_char,
    workers: usize,
    out_csv: *mut *mut c_char,
) -> MedStatus {
    guard(|| {
        let dst = out(out_csv, "out_csv")?;
        let cfg = parse_config(text(config_toml, "config_toml")?, "<ffi>")?;
        let result = run_experiment(
            &cfg,
            RunOptions {
                workers: workers.max(1),
                shadow_check: false,
            },
        )?;
        let mut buf = Vec::new();
        write_csv(&result.rows, &mut buf).map_err(|e| fail(MedStatus::Io, e.to_string()))?;
        let s = CString::new(buf).map_err(|e| fail(MedStatus::Io, e.to_string()))?;
        *dst = s.into_raw();
        Ok(())
    })
}
