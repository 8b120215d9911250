//! C ABI over the numerical core.
//!
//! Every function returns an [`RwlabStatus`]; results go through out
//! pointers. Networks and random-connection samples are opaque handles
//! owned by the caller and released with the matching `_free`. After a
//! failure, `rwlab_last_error` describes it (per thread).

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rwlab::network::{effective_conductance, theorem1_flow, WeightedNetwork};
use rwlab::rcm::{connection_probability, sample_rcm, Kernel, KernelKind, PowerProfile, RcmSample};
use rwlab::walks::{halfmass_check, ConvolutionOptions};
use rwlab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RwlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RwlabKernel {
    Sum = 0,
    Min = 1,
    Product = 2,
    PreferentialAttachment = 3,
}

impl From<RwlabKernel> for KernelKind {
    fn from(k: RwlabKernel) -> Self {
        match k {
            RwlabKernel::Sum => KernelKind::Sum,
            RwlabKernel::Min => KernelKind::Min,
            RwlabKernel::Product => KernelKind::Product,
            RwlabKernel::PreferentialAttachment => KernelKind::PreferentialAttachment,
        }
    }
}

/// Opaque weighted network.
pub struct RwlabNetwork(WeightedNetwork);

/// Opaque random-connection-model sample.
pub struct RwlabRcmSample(RcmSample);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn remember(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> RwlabStatus {
    match e {
        Error::Io(_) | Error::Parse { .. } => RwlabStatus::Io,
        Error::NoConvergence { .. } | Error::Truncation { .. } | Error::Quadrature(_) | Error::Overflow => {
            RwlabStatus::Numerical
        }
        _ => RwlabStatus::InvalidArgument,
    }
}

/// Runs `body`, turning errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (RwlabStatus, String)>) -> RwlabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RwlabStatus::Ok
        }
        Ok(Err((status, message))) => {
            remember(message);
            status
        }
        Err(_) => {
            remember("internal panic".into());
            RwlabStatus::Panic
        }
    }
}

fn core<T>(r: rwlab::Result<T>) -> Result<T, (RwlabStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), (RwlabStatus, String)> {
    if p.is_null() {
        Err((RwlabStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `ptr` must point to `len` readable elements unless `len` is 0.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], (RwlabStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(ptr, name)?;
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn rwlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, nul-terminated version string.
#[no_mangle]
pub extern "C" fn rwlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn rwlab_network_new(vertices: usize, out: *mut *mut RwlabNetwork) -> RwlabStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(RwlabNetwork(WeightedNetwork::new(vertices))));
        Ok(())
    })
}

/// # Safety
/// `net` must come from `rwlab_network_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rwlab_network_add_edge(net: *mut RwlabNetwork, u: usize, v: usize, conductance: f64) -> RwlabStatus {
    guard(|| {
        non_null(net, "net")?;
        core((*net).0.add_edge(u, v, conductance))
    })
}

/// # Safety
/// `net` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rwlab_network_vertex_count(net: *const RwlabNetwork, out: *mut usize) -> RwlabStatus {
    guard(|| {
        non_null(net, "net")?;
        non_null(out, "out")?;
        *out = (*net).0.vertex_count();
        Ok(())
    })
}

/// Effective conductance between vertex sets A and B.
///
/// # Safety
/// `net` must be a live handle, `a`/`b` must hold `a_len`/`b_len`
/// indices and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rwlab_effective_conductance(
    net: *const RwlabNetwork,
    a: *const usize,
    a_len: usize,
    b: *const usize,
    b_len: usize,
    out: *mut f64,
) -> RwlabStatus {
    guard(|| {
        non_null(net, "net")?;
        non_null(out, "out")?;
        let (a, b) = (slice(a, a_len, "a")?, slice(b, b_len, "b")?);
        *out = core(effective_conductance(&(*net).0, a, b))?.value;
        Ok(())
    })
}

/// # Safety
/// `net` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rwlab_network_free(net: *mut RwlabNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Total energy of the staged unit flow to infinity in dimension `dim`
/// with decay exponent `s`, stages `start..=last`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rwlab_flow_energy(dim: usize, s: f64, start: u32, last: u32, out: *mut f64) -> RwlabStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = core(theorem1_flow(dim, s, start, last))?.total_energy();
        Ok(())
    })
}

/// P(|S_n| ≤ 3n) for the discretized Cauchy walk, exact up to the
/// truncation mass reported in `truncated`.
///
/// # Safety
/// `probability` and `truncated` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rwlab_cauchy_halfmass(
    n: usize,
    radius: u64,
    probability: *mut f64,
    truncated: *mut f64,
) -> RwlabStatus {
    guard(|| {
        non_null(probability, "probability")?;
        non_null(truncated, "truncated")?;
        let h = core(halfmass_check(n, &ConvolutionOptions::cauchy(radius)))?;
        *probability = h.probability;
        *truncated = h.truncated_mass;
        Ok(())
    })
}

fn model(kind: RwlabKernel, gamma: f64, beta: f64, delta: f64) -> Result<(Kernel, PowerProfile), (RwlabStatus, String)> {
    Ok((core(Kernel::new(kind.into(), gamma, beta))?, core(PowerProfile::new(delta))?))
}

/// Probability that two points at distance `r` are joined, integrated over
/// both weights, with ρ(x) = min(1, x^{-δ}).
///
/// # Safety
/// `value` must be writable; `error` may be null.
#[no_mangle]
pub unsafe extern "C" fn rwlab_connection_probability(
    kernel: RwlabKernel,
    gamma: f64,
    beta: f64,
    delta: f64,
    r: f64,
    value: *mut f64,
    error: *mut f64,
) -> RwlabStatus {
    guard(|| {
        non_null(value, "value")?;
        let (k, rho) = model(kernel, gamma, beta, delta)?;
        let p = core(connection_probability(&k, &rho, r))?;
        *value = p.value;
        if !error.is_null() {
            *error = p.error;
        }
        Ok(())
    })
}

/// Samples the model in [0, side)² from `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rwlab_rcm_sample(
    side: f64,
    kernel: RwlabKernel,
    gamma: f64,
    beta: f64,
    delta: f64,
    seed: u64,
    out: *mut *mut RwlabRcmSample,
) -> RwlabStatus {
    guard(|| {
        non_null(out, "out")?;
        let (k, rho) = model(kernel, gamma, beta, delta)?;
        let sample = core(sample_rcm(side, k, rho, seed))?;
        *out = Box::into_raw(Box::new(RwlabRcmSample(sample)));
        Ok(())
    })
}

/// # Safety
/// `sample` must be a live handle; `points` and `edges` writable.
#[no_mangle]
pub unsafe extern "C" fn rwlab_rcm_sample_counts(
    sample: *const RwlabRcmSample,
    points: *mut usize,
    edges: *mut usize,
) -> RwlabStatus {
    guard(|| {
        non_null(sample, "sample")?;
        non_null(points, "points")?;
        non_null(edges, "edges")?;
        *points = (*sample).0.points.len();
        *edges = (*sample).0.edges.len();
        Ok(())
    })
}

/// Position and weight parameter of point `index`.
///
/// # Safety
/// `sample` must be a live handle; `xy` must hold two writable doubles
/// and `weight` one.
#[no_mangle]
pub unsafe extern "C" fn rwlab_rcm_sample_point(
    sample: *const RwlabRcmSample,
    index: usize,
    xy: *mut f64,
    weight: *mut f64,
) -> RwlabStatus {
    guard(|| {
        non_null(sample, "sample")?;
        non_null(xy, "xy")?;
        non_null(weight, "weight")?;
        let sample = &(*sample).0;
        let p = sample
            .points
            .get(index)
            .ok_or_else(|| (RwlabStatus::InvalidArgument, format!("point {index} out of range")))?;
        *xy = p.position[0];
        *xy.add(1) = p.position[1];
        *weight = p.weight;
        Ok(())
    })
}

/// # Safety
/// `sample` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rwlab_rcm_sample_free(sample: *mut RwlabRcmSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}
