//! C interface to `agentic-core`.
//!
//! Conventions:
//!
//! - every fallible function returns an [`AgenticStatus`]; on failure a
//!   message is available from [`agentic_last_error`] on the same thread;
//! - strings passed in are NUL-terminated UTF-8 and are borrowed;
//! - strings handed out through `char **out` parameters are owned by the
//!   caller and must be released with [`agentic_string_free`];
//! - a stack handle from [`agentic_stack_up`] owns its own async runtime and
//!   must be released with [`agentic_stack_down`]. Calls on one handle may
//!   come from any thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use agentic_core::agent::interpret_intent;
use agentic_core::config::DeploymentConfig;
use agentic_core::nf::{build_resource_uri, LifecycleAction, NfType};
use agentic_core::scenario::{run_scenario, ScenarioSpec};
use agentic_core::stack::{stack_up, Stack, StackError};
use agentic_core::trace::{latency_breakdown, TraceEvent};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgenticStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    PortConflict = 4,
    StartupFailed = 5,
    LifecycleFailed = 6,
    TaskFailed = 7,
    Internal = 8,
    Panic = 9,
}

/// Opaque handle on a running stack.
pub struct AgenticStack {
    runtime: tokio::runtime::Runtime,
    stack: Arc<Stack>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: AgenticStatus, msg: impl Into<String>) -> AgenticStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into [`AgenticStatus::Panic`].
fn guard(f: impl FnOnce() -> AgenticStatus) -> AgenticStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(AgenticStatus::Panic, msg)
        }
    }
}

/// # Safety
/// `p` is null or a NUL-terminated string valid for the duration of the call.
unsafe fn arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, AgenticStatus> {
    if p.is_null() {
        return Err(fail(AgenticStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(AgenticStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

/// # Safety
/// `out` is null or valid for writing one pointer.
unsafe fn hand_out(out: *mut *mut c_char, s: String) -> AgenticStatus {
    if out.is_null() {
        return fail(AgenticStatus::NullArgument, "out is null");
    }
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            AgenticStatus::Ok
        }
        Err(_) => fail(AgenticStatus::Internal, "result contains a NUL byte"),
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread; do not free.
#[no_mangle]
pub extern "C" fn agentic_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn agentic_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version; static, do not free.
#[no_mangle]
pub extern "C" fn agentic_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds `{apiRoot}/{apiName}/{apiVersion}/{resource}`.
///
/// # Safety
/// String arguments are valid C strings; `out` is valid for writing.
#[no_mangle]
pub unsafe extern "C" fn agentic_build_resource_uri(
    api_root: *const c_char,
    api_name: *const c_char,
    api_version: *const c_char,
    resource: *const c_char,
    out: *mut *mut c_char,
) -> AgenticStatus {
    guard(|| {
        let root = tri!(arg(api_root, "api_root"));
        let name = tri!(arg(api_name, "api_name"));
        let version = tri!(arg(api_version, "api_version"));
        let res = tri!(arg(resource, "resource"));
        match build_resource_uri(root, name, version, res) {
            Ok(uri) => hand_out(out, uri),
            Err(e) => fail(AgenticStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Interprets an operator intent against the default deployment; writes the
/// plan as JSON (`{"steps":[...]}`).
///
/// # Safety
/// `prompt` is a valid C string; `out` is valid for writing.
#[no_mangle]
pub unsafe extern "C" fn agentic_interpret_intent(prompt: *const c_char, out: *mut *mut c_char) -> AgenticStatus {
    guard(|| {
        let prompt = tri!(arg(prompt, "prompt"));
        match interpret_intent(prompt, &NfType::ALL) {
            Ok(plan) => hand_out(out, serde_json::to_string(&plan).unwrap_or_default()),
            Err(e) => fail(AgenticStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Latency breakdown of traced runs. Input: JSON array of runs, each an
/// array of trace events. Output: the report as JSON.
///
/// # Safety
/// `traces_json` is a valid C string; `out` is valid for writing.
#[no_mangle]
pub unsafe extern "C" fn agentic_latency_breakdown(traces_json: *const c_char, out: *mut *mut c_char) -> AgenticStatus {
    guard(|| {
        let text = tri!(arg(traces_json, "traces_json"));
        let traces: Vec<Vec<TraceEvent>> = match serde_json::from_str(text) {
            Ok(t) => t,
            Err(e) => return fail(AgenticStatus::InvalidArgument, format!("traces_json: {e}")),
        };
        match latency_breakdown(&traces) {
            Ok(r) => hand_out(out, serde_json::to_string(&r).unwrap_or_default()),
            Err(e) => fail(AgenticStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Boots a stack. `config_toml` is a deployment config in TOML, or null for
/// the defaults on OS-assigned ports.
///
/// # Safety
/// `config_toml` is null or a valid C string; `out` is valid for writing.
#[no_mangle]
pub unsafe extern "C" fn agentic_stack_up(config_toml: *const c_char, out: *mut *mut AgenticStack) -> AgenticStatus {
    guard(|| {
        if out.is_null() {
            return fail(AgenticStatus::NullArgument, "out is null");
        }
        let config = if config_toml.is_null() {
            DeploymentConfig::ephemeral()
        } else {
            match DeploymentConfig::from_toml(tri!(arg(config_toml, "config_toml"))) {
                Ok(c) => c,
                Err(e) => return fail(AgenticStatus::InvalidArgument, e.to_string()),
            }
        };
        let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
            Ok(rt) => rt,
            Err(e) => return fail(AgenticStatus::Internal, format!("cannot start runtime: {e}")),
        };
        match runtime.block_on(stack_up(config)) {
            Ok(stack) => {
                *out = Box::into_raw(Box::new(AgenticStack { runtime, stack }));
                AgenticStatus::Ok
            }
            Err(e @ StackError::Bind(_)) => fail(AgenticStatus::PortConflict, e.to_string()),
            Err(e @ (StackError::Config(_) | StackError::Profile(_))) => {
                fail(AgenticStatus::InvalidArgument, e.to_string())
            }
            Err(e) => fail(AgenticStatus::StartupFailed, e.to_string()),
        }
    })
}

/// # Safety
/// `h` is null or a live handle.
unsafe fn handle<'a>(h: *const AgenticStack) -> Result<&'a AgenticStack, AgenticStatus> {
    h.as_ref()
        .ok_or_else(|| fail(AgenticStatus::NullArgument, "stack handle is null"))
}

/// Stops the stack and releases the handle. Null is ignored.
///
/// # Safety
/// `h` is null or a handle from [`agentic_stack_up`] not yet released; no
/// other thread may use it concurrently.
#[no_mangle]
pub unsafe extern "C" fn agentic_stack_down(h: *mut AgenticStack) {
    if h.is_null() {
        return;
    }
    let b = Box::from_raw(h);
    let _ = catch_unwind(AssertUnwindSafe(|| {
        b.runtime.block_on(b.stack.down());
        drop(b);
    }));
}

/// Sends a prompt to the Host Agent. Writes `{"run","text","error","elapsedS","events"}`
/// as JSON; returns [`AgenticStatus::TaskFailed`] (still writing the JSON)
/// when the task did not complete.
///
/// # Safety
/// `h` is a live handle; `text` a valid C string; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn agentic_stack_prompt(
    h: *const AgenticStack,
    text: *const c_char,
    out: *mut *mut c_char,
) -> AgenticStatus {
    guard(|| {
        let s = tri!(handle(h));
        let text = tri!(arg(text, "text"));
        let outcome = s.runtime.block_on(s.stack.prompt(text));
        let status = hand_out(out, serde_json::to_string(&outcome).unwrap_or_default());
        match (&outcome.error, status) {
            (Some(e), AgenticStatus::Ok) => fail(AgenticStatus::TaskFailed, e.clone()),
            _ => status,
        }
    })
}

/// Applies a lifecycle action (`start`, `stop`, `restart`) to an NF and
/// writes the outcome as JSON.
///
/// # Safety
/// `h` is a live handle; strings are valid C strings; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn agentic_stack_lifecycle(
    h: *const AgenticStack,
    nf_type: *const c_char,
    action: *const c_char,
    out: *mut *mut c_char,
) -> AgenticStatus {
    guard(|| {
        let s = tri!(handle(h));
        let nf: NfType = match tri!(arg(nf_type, "nf_type")).parse() {
            Ok(nf) => nf,
            Err(e) => return fail(AgenticStatus::InvalidArgument, format!("{e}")),
        };
        let action: LifecycleAction = match tri!(arg(action, "action")).parse() {
            Ok(a) => a,
            Err(e) => return fail(AgenticStatus::InvalidArgument, e),
        };
        match s.runtime.block_on(s.stack.runtime().lifecycle(nf, action)) {
            Ok(o) => hand_out(out, serde_json::to_string(&o).unwrap_or_default()),
            Err(e) => fail(AgenticStatus::LifecycleFailed, e.to_string()),
        }
    })
}

/// NF states, registrations and endpoints as JSON.
///
/// # Safety
/// `h` is a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn agentic_stack_status(h: *const AgenticStack, out: *mut *mut c_char) -> AgenticStatus {
    guard(|| {
        let s = tri!(handle(h));
        hand_out(out, serde_json::to_string(&s.stack.status()).unwrap_or_default())
    })
}

/// Runs a built-in scenario or scenario file; writes the outcome as JSON and
/// returns [`AgenticStatus::TaskFailed`] (still writing it) when any
/// assertion failed.
///
/// # Safety
/// `h` is a live handle; `scenario` a valid C string; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn agentic_stack_run_scenario(
    h: *const AgenticStack,
    scenario: *const c_char,
    out: *mut *mut c_char,
) -> AgenticStatus {
    guard(|| {
        let s = tri!(handle(h));
        let spec = match ScenarioSpec::resolve(tri!(arg(scenario, "scenario"))) {
            Ok(spec) => spec,
            Err(e) => return fail(AgenticStatus::InvalidArgument, e.to_string()),
        };
        match s.runtime.block_on(run_scenario(&s.stack, &spec)) {
            Ok(outcome) => {
                let status = hand_out(out, serde_json::to_string(&outcome).unwrap_or_default());
                if status == AgenticStatus::Ok && !outcome.passed() {
                    fail(AgenticStatus::TaskFailed, format!("scenario {} failed", outcome.scenario))
                } else {
                    status
                }
            }
            Err(e) => fail(AgenticStatus::InvalidArgument, e.to_string()),
        }
    })
}
