//! C ABI over `ddf-dmt`.
//!
//! Every fallible function returns a [`DdfStatus`]; on failure the message is
//! available from [`ddf_last_error`] on the same thread. Handles are opaque
//! and owned by the caller, who releases them with the matching `_free`.
//! Strings returned through `char **` out-parameters are released with
//! [`ddf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ddf_dmt::analytic::CurveId;
use ddf_dmt::outage::region::{self, Objective, OutageRegionSpec};
use ddf_dmt::outage::infimum;
use ddf_dmt::sim::{run_trials, write_sim_csv, PointEstimate, SimConfig};
use ddf_dmt::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DdfStatus {
    Ok = 0,
    /// An argument is outside the domain of a formula.
    DomainError = 1,
    InvalidArgument = 2,
    NullPointer = 3,
    /// The region is empty; the infimum is reported as `+inf`.
    Infeasible = 4,
    Internal = 5,
}

/// A compiled outage region.
pub struct DdfRegion {
    spec: OutageRegionSpec,
}

/// A Monte Carlo campaign and, after a run, its results.
pub struct DdfSimulator {
    config: SimConfig,
    points: Option<Vec<PointEstimate>>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (DdfStatus, String);

fn status_of(e: &Error) -> DdfStatus {
    match e {
        Error::Domain { .. } => DdfStatus::DomainError,
        Error::Infeasible(_) => DdfStatus::Infeasible,
        Error::InvalidArgument(_)
        | Error::Config { .. }
        | Error::UnknownCurve(_)
        | Error::ResourceGuard(_)
        | Error::Json(_) => DdfStatus::InvalidArgument,
        _ => DdfStatus::Internal,
    }
}

fn fail(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> Failure {
    (DdfStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, converting errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DdfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DdfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DdfStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (DdfStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (DdfStatus::Internal, "string contains nul".into()))
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ddf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ddf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Evaluates a named tradeoff curve with `rounds` ARQ rounds at `r`.
///
/// # Safety
/// `curve_id` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ddf_curve_eval(curve_id: *const c_char, rounds: u32, r: f64, out: *mut f64) -> DdfStatus {
    guard(|| {
        let id = str_arg(curve_id, "curve_id")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let id = CurveId::parse(id).map_err(fail)?;
        let d = id.curve(rounds).and_then(|c| c.eval(r)).map_err(fail)?;
        *out = d;
        Ok(())
    })
}

fn build_region(kind: &str, r: f64) -> ddf_dmt::Result<OutageRegionSpec> {
    let f = match kind {
        "mar_type1" => region::region_mar_type1,
        "mar_type12" => region::region_mar_type12,
        "cvma_inferior" => region::region_cvma_inferior,
        "cvma_ji" => region::region_cvma_ji,
        "cvma_js" => region::region_cvma_js,
        "cvma_s1" => region::region_cvma_s1,
        "cvma_sji" => region::region_cvma_sji,
        "cvma_sjs" => region::region_cvma_sjs,
        "cvma_sjs_full" => region::region_cvma_sjs_full,
        _ => return Err(Error::InvalidArgument(format!("unknown region kind `{kind}`"))),
    };
    f(r)
}

unsafe fn put_region(out: *mut *mut DdfRegion, spec: OutageRegionSpec) {
    *out = Box::into_raw(Box::new(DdfRegion { spec }));
}

/// Builds one of the built-in regions (`mar_type1`, `mar_type12`,
/// `cvma_inferior`, `cvma_ji`, `cvma_js`, `cvma_s1`, `cvma_sji`, `cvma_sjs`,
/// `cvma_sjs_full`) at rate `r`.
///
/// # Safety
/// `kind` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ddf_region_new(kind: *const c_char, r: f64, out: *mut *mut DdfRegion) -> DdfStatus {
    guard(|| {
        let kind = str_arg(kind, "kind")?;
        if out.is_null() {
            return Err(null("out"));
        }
        put_region(out, build_region(kind, r).map_err(fail)?);
        Ok(())
    })
}

/// Parses a region from its JSON form.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ddf_region_from_json(json: *const c_char, out: *mut *mut DdfRegion) -> DdfStatus {
    guard(|| {
        let json = str_arg(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        put_region(out, OutageRegionSpec::from_json(json).map_err(fail)?);
        Ok(())
    })
}

/// Serializes a region to JSON.
///
/// # Safety
/// `region` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ddf_region_to_json(region: *const DdfRegion, out: *mut *mut c_char) -> DdfStatus {
    guard(|| {
        let region = region.as_ref().ok_or_else(|| null("region"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(region.spec.to_json().map_err(fail)?)?;
        Ok(())
    })
}

/// Infimum of a weighted sum of exponential orders over the region.
///
/// `weights` points at 5 values or is null for the plain sum. `argmin` (5
/// values) and `fraction` are optional; `fraction` is NaN when the region
/// has no listening rule. An empty region returns `INFEASIBLE` with
/// `*value = +inf`.
///
/// # Safety
/// Non-null pointers must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn ddf_region_infimum(
    region: *const DdfRegion,
    weights: *const f64,
    value: *mut f64,
    argmin: *mut f64,
    fraction: *mut f64,
) -> DdfStatus {
    guard(|| {
        let region = region.as_ref().ok_or_else(|| null("region"))?;
        if value.is_null() {
            return Err(null("value"));
        }
        let objective = if weights.is_null() {
            Objective::sum()
        } else {
            let mut w = [0.0; 5];
            w.copy_from_slice(std::slice::from_raw_parts(weights, 5));
            Objective { weights: w }
        };
        let res = infimum(&region.spec, &objective).map_err(fail)?;
        *value = res.value;
        if !fraction.is_null() {
            *fraction = res.fraction.unwrap_or(f64::NAN);
        }
        match res.argmin {
            Some(x) => {
                if !argmin.is_null() {
                    std::slice::from_raw_parts_mut(argmin, 5).copy_from_slice(&x.values);
                }
                Ok(())
            }
            None => Err((
                DdfStatus::Infeasible,
                format!("region `{}` is infeasible", region.spec.name),
            )),
        }
    })
}

/// # Safety
/// `region` must come from this library (or be null) and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ddf_region_free(region: *mut DdfRegion) {
    if !region.is_null() {
        drop(Box::from_raw(region));
    }
}

/// Creates a simulator from a JSON campaign description, for example
/// `{"scenario":"relay","L":2,"r1":0.5,"snr_db_list":[10,20],"n_trials":10000,"seed":1}`.
///
/// # Safety
/// `config_json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ddf_simulator_new(config_json: *const c_char, out: *mut *mut DdfSimulator) -> DdfStatus {
    guard(|| {
        let json = str_arg(config_json, "config_json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config: SimConfig = serde_json::from_str(json).map_err(|e| fail(e.into()))?;
        config.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(DdfSimulator { config, points: None }));
        Ok(())
    })
}

/// Runs the campaign and writes the error probability of each SNR point to
/// `pe` (capacity `capacity`); `*n_points` receives the number of points.
/// `pe` may be null to query the count.
///
/// # Safety
/// `sim` must come from this library; `pe` must hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn ddf_simulator_run(
    sim: *mut DdfSimulator,
    pe: *mut f64,
    capacity: usize,
    n_points: *mut usize,
) -> DdfStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        if n_points.is_null() {
            return Err(null("n_points"));
        }
        let n = sim.config.snr_db_list.len();
        *n_points = n;
        if !pe.is_null() && capacity < n {
            return Err((
                DdfStatus::InvalidArgument,
                format!("capacity {capacity} below {n} SNR points"),
            ));
        }
        let points = run_trials(&sim.config).map_err(fail)?;
        if !pe.is_null() {
            for (k, p) in points.iter().enumerate() {
                *pe.add(k) = p.pe;
            }
        }
        sim.points = Some(points);
        Ok(())
    })
}

/// Results of the last run as CSV (`snr_db,pe,pe_lo,pe_hi,eta,...`).
///
/// # Safety
/// `sim` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ddf_simulator_csv(sim: *const DdfSimulator, out: *mut *mut c_char) -> DdfStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let points = sim
            .points
            .as_ref()
            .ok_or_else(|| (DdfStatus::InvalidArgument, "simulator has not been run".to_string()))?;
        let mut buf = Vec::new();
        write_sim_csv(&mut buf, sim.config.l, points).map_err(fail)?;
        *out = into_c_string(String::from_utf8(buf).expect("csv is utf-8"))?;
        Ok(())
    })
}

/// # Safety
/// `sim` must come from this library (or be null) and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ddf_simulator_free(sim: *mut DdfSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// # Safety
/// `s` must be a string returned by this library (or null).
#[no_mangle]
pub unsafe extern "C" fn ddf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
