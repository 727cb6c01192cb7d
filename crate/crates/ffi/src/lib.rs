//! C ABI over the `gsm-threshold` library.
//!
//! Every fallible function returns a status code (`GSM_OK` on success) and
//! writes results through out-pointers. After a failure,
//! [`gsm_last_error_message`] describes the error on the calling thread.
//! Syndrome graphs are exposed as the opaque handle [`GsmGraphs`], created
//! by [`gsm_graphs_new`] and released with [`gsm_graphs_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gsm_threshold::bsm::{qpc_probs, BsmModel, Convention, Protocol};
use gsm_threshold::erasure::{run_batch_for_distance, CorrelationMode, ErasureModel};
use gsm_threshold::gsm::{self, Architecture, GsmSpec};
use gsm_threshold::network::build_network;
use gsm_threshold::syndrome::{build_syndrome_graphs, HubRule, SyndromeGraphs};
use gsm_threshold::Error;

pub const GSM_OK: i32 = 0;
pub const GSM_ERR_VALIDATION: i32 = 1;
pub const GSM_ERR_RUNTIME: i32 = 2;
pub const GSM_ERR_IO: i32 = 3;
pub const GSM_ERR_NULL_POINTER: i32 = 4;
pub const GSM_ERR_PANIC: i32 = 5;

pub const GSM_ARCH_MINIMAL: u32 = 0;
pub const GSM_ARCH_CYCLIC: u32 = 1;

pub const GSM_PROTOCOL_STATIC: u32 = 0;
pub const GSM_PROTOCOL_ACTIVE: u32 = 1;

/// Use the architecture's preferred convention.
pub const GSM_CONVENTION_DEFAULT: u32 = 0;
pub const GSM_CONVENTION_HADAMARD: u32 = 1;
pub const GSM_CONVENTION_SHOR: u32 = 2;

pub const GSM_CORRELATION_INDEPENDENT: u32 = 0;
pub const GSM_CORRELATION_PER_BSM: u32 = 1;

/// Encoded-BSM scheme of one fusion network.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GsmScheme {
    /// `GSM_ARCH_*`.
    pub architecture: u32,
    /// `GSM_PROTOCOL_*`.
    pub protocol: u32,
    pub n: u32,
    pub m: u32,
    /// Feed-forward depth; must be 0 for the static protocol.
    pub j: u32,
    /// `GSM_CONVENTION_*`.
    pub convention: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GsmBsmProbs {
    pub p_xx: f64,
    pub p_zz: f64,
    pub p_joint: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GsmErasureProbs {
    pub p_erase_x: f64,
    pub p_erase_zz: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GsmBatchResult {
    pub samples: u64,
    pub failures: u64,
    pub primal_failures: u64,
    pub dual_failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Primal and dual syndrome graphs of one code distance.
pub struct GsmGraphs {
    inner: SyndromeGraphs,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

enum FfiError {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for FfiError {
    fn from(e: Error) -> Self {
        FfiError::Core(e)
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guarded<F: FnOnce() -> Result<(), FfiError>>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            GSM_OK
        }
        Ok(Err(FfiError::Null(name))) => {
            set_last_error(&format!("`{name}` is a null pointer"));
            GSM_ERR_NULL_POINTER
        }
        Ok(Err(FfiError::Core(e))) => {
            set_last_error(&e.to_string());
            match e.exit_code() {
                1 => GSM_ERR_VALIDATION,
                3 => GSM_ERR_IO,
                _ => GSM_ERR_RUNTIME,
            }
        }
        Err(_) => {
            set_last_error("internal panic");
            GSM_ERR_PANIC
        }
    }
}

fn null_pointer(name: &'static str) -> FfiError {
    FfiError::Null(name)
}

fn architecture(code: u32) -> Result<Architecture, Error> {
    match code {
        GSM_ARCH_MINIMAL => Ok(Architecture::Minimal),
        GSM_ARCH_CYCLIC => Ok(Architecture::Cyclic),
        _ => Err(Error::validation(
            "architecture",
            format!("unknown code {code}"),
        )),
    }
}

fn correlation(code: u32) -> Result<CorrelationMode, Error> {
    match code {
        GSM_CORRELATION_INDEPENDENT => Ok(CorrelationMode::Independent),
        GSM_CORRELATION_PER_BSM => Ok(CorrelationMode::PerBsm),
        _ => Err(Error::validation(
            "correlation",
            format!("unknown code {code}"),
        )),
    }
}

impl GsmScheme {
    fn architecture(&self) -> Result<Architecture, Error> {
        architecture(self.architecture)
    }

    fn bsm(&self, eta: f64) -> Result<BsmModel, Error> {
        let arch = self.architecture()?;
        let protocol = match self.protocol {
            GSM_PROTOCOL_STATIC => Protocol::Static,
            GSM_PROTOCOL_ACTIVE => Protocol::Active,
            other => {
                return Err(Error::validation(
                    "protocol",
                    format!("unknown code {other}"),
                ))
            }
        };
        let convention = match self.convention {
            GSM_CONVENTION_DEFAULT => arch.default_convention(),
            GSM_CONVENTION_HADAMARD => Convention::Hadamard,
            GSM_CONVENTION_SHOR => Convention::Shor,
            other => {
                return Err(Error::validation(
                    "convention",
                    format!("unknown code {other}"),
                ))
            }
        };
        BsmModel::new(protocol, self.n, self.m, self.j, convention, eta)
    }
}

/// # Safety
/// `scheme` must be null or point to a valid `GsmScheme`.
unsafe fn read_scheme(scheme: *const GsmScheme) -> Result<GsmScheme, FfiError> {
    scheme
        .as_ref()
        .copied()
        .ok_or_else(|| null_pointer("scheme"))
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn gsm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gsm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Outcome probabilities of one encoded BSM at loss rate `eta`.
///
/// # Safety
/// `scheme` and `out` must be valid pointers or null.
#[no_mangle]
pub unsafe extern "C" fn gsm_bsm_probs(
    scheme: *const GsmScheme,
    eta: f64,
    out: *mut GsmBsmProbs,
) -> i32 {
    guarded(|| {
        let scheme = read_scheme(scheme)?;
        let out = out.as_mut().ok_or_else(|| null_pointer("out"))?;
        let p = qpc_probs(&scheme.bsm(eta)?)?;
        *out = GsmBsmProbs {
            p_xx: p.p_xx,
            p_zz: p.p_zz,
            p_joint: p.p_joint,
        };
        Ok(())
    })
}

/// Erasure probabilities of a `k`-qubit GSM built from the scheme's BSMs.
///
/// # Safety
/// `scheme` and `out` must be valid pointers or null.
#[no_mangle]
pub unsafe extern "C" fn gsm_erasure_probs(
    scheme: *const GsmScheme,
    k: u32,
    eta: f64,
    out: *mut GsmErasureProbs,
) -> i32 {
    guarded(|| {
        let scheme = read_scheme(scheme)?;
        let out = out.as_mut().ok_or_else(|| null_pointer("out"))?;
        let spec = GsmSpec::new(scheme.architecture()?, k, scheme.bsm(eta)?)?;
        let e = gsm::gsm_erasure_probs(&spec)?;
        *out = GsmErasureProbs {
            p_erase_x: e.p_erase_x,
            p_erase_zz: e.p_erase_zz,
        };
        Ok(())
    })
}

/// Probability that a `k`-qubit GSM yields its full logical outcome.
///
/// # Safety
/// `scheme` and `out` must be valid pointers or null.
#[no_mangle]
pub unsafe extern "C" fn gsm_efficiency(
    scheme: *const GsmScheme,
    k: u32,
    eta: f64,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        let scheme = read_scheme(scheme)?;
        let out = out.as_mut().ok_or_else(|| null_pointer("out"))?;
        *out = gsm::gsm_efficiency(&GsmSpec::new(scheme.architecture()?, k, scheme.bsm(eta)?)?)?;
        Ok(())
    })
}

/// Photons in one encoded two-qubit resource state.
#[no_mangle]
pub extern "C" fn gsm_photons_per_resource_state(architecture_code: u32, n: u32, m: u32) -> u32 {
    architecture(architecture_code).map_or(0, |a| a.photons_per_resource_state(n, m))
}

/// Builds the syndrome graphs of an odd distance `d >= 3`. On success
/// `*out` receives a handle to release with `gsm_graphs_free`.
///
/// # Safety
/// `out` must be a valid pointer or null.
#[no_mangle]
pub unsafe extern "C" fn gsm_graphs_new(
    d: u32,
    architecture_code: u32,
    out: *mut *mut GsmGraphs,
) -> i32 {
    guarded(|| {
        let out = out.as_mut().ok_or_else(|| null_pointer("out"))?;
        *out = std::ptr::null_mut();
        let network = build_network(d, architecture(architecture_code)?)?;
        let inner = build_syndrome_graphs(&network, HubRule::default())?;
        *out = Box::into_raw(Box::new(GsmGraphs { inner }));
        Ok(())
    })
}

/// Releases a handle from `gsm_graphs_new`. Null is ignored.
///
/// # Safety
/// `graphs` must come from `gsm_graphs_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gsm_graphs_free(graphs: *mut GsmGraphs) {
    if !graphs.is_null() {
        drop(Box::from_raw(graphs));
    }
}

/// Edge counts of the primal and dual graphs.
///
/// # Safety
/// All pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn gsm_graphs_edge_counts(
    graphs: *const GsmGraphs,
    primal: *mut usize,
    dual: *mut usize,
) -> i32 {
    guarded(|| {
        let g = &graphs.as_ref().ok_or_else(|| null_pointer("graphs"))?.inner;
        let primal = primal.as_mut().ok_or_else(|| null_pointer("primal"))?;
        let dual = dual.as_mut().ok_or_else(|| null_pointer("dual"))?;
        *primal = g.primal.edges.len();
        *dual = g.dual.edges.len();
        Ok(())
    })
}

/// Monte-Carlo logical error rate of the graphs under the scheme's
/// erasures at loss rate `eta`. Deterministic in `seed`.
///
/// # Safety
/// All pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn gsm_run_batch(
    graphs: *const GsmGraphs,
    scheme: *const GsmScheme,
    eta: f64,
    correlation_code: u32,
    samples: u64,
    seed: u64,
    out: *mut GsmBatchResult,
) -> i32 {
    guarded(|| {
        let g = &graphs.as_ref().ok_or_else(|| null_pointer("graphs"))?.inner;
        let scheme = read_scheme(scheme)?;
        let out = out.as_mut().ok_or_else(|| null_pointer("out"))?;
        let arch = scheme.architecture()?;
        if arch != g.architecture {
            return Err(Error::validation(
                "architecture",
                "scheme and graphs use different architectures",
            )
            .into());
        }
        let probs = qpc_probs(&scheme.bsm(eta)?)?;
        let model = ErasureModel::from_bsm(arch, &probs, correlation(correlation_code)?)?;
        let r = run_batch_for_distance(g, &model, samples, seed)?;
        *out = GsmBatchResult {
            samples: r.samples,
            failures: r.failures,
            primal_failures: r.primal_failures,
            dual_failures: r.dual_failures,
            rate: r.rate,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
        };
        Ok(())
    })
}
