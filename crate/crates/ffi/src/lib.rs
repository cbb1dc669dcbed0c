//! C interface to the crowdstep simulator.
//!
//! A simulation is an opaque `CsWorld` built from a JSON configuration.
//! Every fallible call returns a `CsStatus`; on failure the message is
//! available from `cs_last_error_message` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crowdstep::config::parse_config;
use crowdstep::engine::{step, World};
use crowdstep::scenarios::build;
use crowdstep::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    Simulation = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque simulation handle.
pub struct CsWorld {
    world: World,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> CsStatus {
    match e {
        Error::Config { .. } | Error::InvalidParameter(_) | Error::Domain(_) | Error::InvalidGeometry(_) => {
            CsStatus::InvalidConfig
        }
        _ => CsStatus::Simulation,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (CsStatus, String)>) -> CsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CsStatus::Panic
        }
    }
}

fn fail(e: Error) -> (CsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (CsStatus, String) {
    (CsStatus::NullPointer, format!("{name} is null"))
}

/// Parses `config_json`, builds its scenario and stores a new handle in
/// `*out`. The handle must be released with `cs_world_free`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_world_new(config_json: *const c_char, out: *mut *mut CsWorld) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| (CsStatus::InvalidUtf8, e.to_string()))?;
        let config = parse_config(text).map_err(fail)?;
        let world = build(&config.scenario, &config.gait, &config.model, config.seed).map_err(fail)?;
        *out = Box::into_raw(Box::new(CsWorld { world }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `world` must come from `cs_world_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cs_world_free(world: *mut CsWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

unsafe fn handle<'a>(world: *mut CsWorld) -> Result<&'a mut CsWorld, (CsStatus, String)> {
    world.as_mut().ok_or_else(|| null("world"))
}

/// Advances the simulation by `ticks` steps.
///
/// # Safety
/// `world` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_world_step(world: *mut CsWorld, ticks: u64) -> CsStatus {
    guard(|| {
        let w = handle(world)?;
        for _ in 0..ticks {
            step(&mut w.world).map_err(fail)?;
        }
        Ok(())
    })
}

/// Current tick.
///
/// # Safety
/// `world` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_world_tick(world: *mut CsWorld, out: *mut u64) -> CsStatus {
    guard(|| {
        let w = handle(world)?;
        *out.as_mut().ok_or_else(|| null("out"))? = w.world.tick;
        Ok(())
    })
}

/// Number of agents still in the simulation.
///
/// # Safety
/// `world` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_world_agent_count(world: *mut CsWorld, out: *mut usize) -> CsStatus {
    guard(|| {
        let w = handle(world)?;
        *out.as_mut().ok_or_else(|| null("out"))? = w.world.agents.len();
        Ok(())
    })
}

/// Copies agent ids and positions in id order: `ids[k]` and
/// `xy[2k], xy[2k+1]`. `capacity` is the number of agents the buffers can
/// hold. `*written` receives the agent count; if it exceeds `capacity`
/// nothing is copied and `CS_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `ids` must hold `capacity` u32 values and `xy` `2·capacity` doubles;
/// either may be null when `capacity` is 0.
#[no_mangle]
pub unsafe extern "C" fn cs_world_positions(
    world: *mut CsWorld,
    ids: *mut u32,
    xy: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> CsStatus {
    guard(|| {
        let w = handle(world)?;
        let written = written.as_mut().ok_or_else(|| null("written"))?;
        let agents = &w.world.agents;
        *written = agents.len();
        if agents.len() > capacity {
            return Err((
                CsStatus::BufferTooSmall,
                format!("{} agents, capacity {capacity}", agents.len()),
            ));
        }
        if agents.is_empty() {
            return Ok(());
        }
        if ids.is_null() || xy.is_null() {
            return Err(null("ids or xy"));
        }
        let ids = std::slice::from_raw_parts_mut(ids, agents.len());
        let xy = std::slice::from_raw_parts_mut(xy, 2 * agents.len());
        for (k, a) in agents.iter().enumerate() {
            ids[k] = a.id;
            xy[2 * k] = a.position.x;
            xy[2 * k + 1] = a.position.y;
        }
        Ok(())
    })
}

/// Smallest `distance − b_ij` over all agent pairs.
///
/// # Safety
/// `world` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_world_min_gap(world: *mut CsWorld, out: *mut f64) -> CsStatus {
    guard(|| {
        let w = handle(world)?;
        *out.as_mut().ok_or_else(|| null("out"))? = w.world.min_pair_gap();
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, NUL-terminated and static.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
