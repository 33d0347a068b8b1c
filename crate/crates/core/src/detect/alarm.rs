use std::io::Write;
use std::path::Path;

use super::detector::DetectorModel;
use crate::error::{Error, Result};
use crate::io::sig;
use crate::plant::RunRecord;

/// Outcome of streaming a run through a calibrated detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub t: Vec<f64>,
    pub d_series: Vec<f64>,
    pub threshold: f64,
    pub alpha: f64,
    pub hold: usize,
    /// Raw exceedances `(t, d)`.
    pub alarms: Vec<(f64, f64)>,
    /// Per-sample confirmed-alarm state.
    pub confirmed: Vec<bool>,
    pub first_confirmed_alarm: Option<f64>,
    pub fault_time: Option<f64>,
    pub detection_delay: Option<f64>,
    /// Confirmed alarm episodes that started before the fault (or anywhere in
    /// a healthy run).
    pub false_confirmed: usize,
    pub far: f64,
}

impl DetectionReport {
    pub fn detected(&self) -> bool {
        self.detection_delay.is_some()
    }

    /// Chebyshev exceedance bound `1 / alpha^2`.
    pub fn bound(&self) -> f64 {
        1.0 / (self.alpha * self.alpha)
    }

    pub fn write_summary<W: Write>(&self, w: &mut W) -> Result<()> {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x}"));
        writeln!(w, "detected={}", self.detected())?;
        writeln!(w, "fault_time_s={}", opt(self.fault_time))?;
        writeln!(
            w,
            "first_confirmed_alarm_s={}",
            opt(self.first_confirmed_alarm)
        )?;
        writeln!(w, "detection_delay_s={}", opt(self.detection_delay))?;
        writeln!(w, "false_confirmed_alarms={}", self.false_confirmed)?;
        writeln!(w, "raw_alarms={}", self.alarms.len())?;
        writeln!(w, "far={}", self.far)?;
        writeln!(w, "far_bound={}", self.bound())?;
        writeln!(w, "threshold={}", self.threshold)?;
        writeln!(w, "alpha={}", self.alpha)?;
        writeln!(w, "hold={}", self.hold)?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,d,threshold,alarm")?;
        for k in 0..self.t.len() {
            writeln!(
                w,
                "{},{},{},{}",
                sig(self.t[k], 9),
                sig(self.d_series[k], 9),
                sig(self.threshold, 9),
                u8::from(self.confirmed[k])
            )?;
        }
        Ok(())
    }

    /// Write `<stem>.txt` (summary) and `<stem>.csv` (distance series).
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        let mut f =
            std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{stem}.txt")))?);
        self.write_summary(&mut f)?;
        f.flush()?;
        let mut f =
            std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{stem}.csv")))?);
        self.write_csv(&mut f)?;
        f.flush()?;
        Ok(())
    }
}

/// Stream the observer and distance over `run`.
///
/// A sample is a raw alarm when `d > threshold`; it is confirmed once `hold`
/// consecutive raw alarms have occurred. The delay is measured from the first
/// applied fault to the first confirmation at or after it. The false-alarm
/// rate counts raw alarms over pre-fault samples (all samples when healthy).
pub fn run_detection(det: &DetectorModel, run: &RunRecord, hold: usize) -> Result<DetectionReport> {
    let dt = det.observer.sys.dt;
    if (run.dt_out - dt).abs() > 1e-9 * dt {
        return Err(Error::Config(format!(
            "run step {} s differs from detector step {dt} s",
            run.dt_out
        )));
    }
    if hold == 0 {
        return Err(Error::Config(
            "alarm hold must be at least one sample".into(),
        ));
    }
    let z = det.observer.residuals(&run.u, &run.y);
    let d_series: Vec<f64> = z.iter().map(|v| det.stats.distance(v)).collect();
    let fault_time = run.fault_time();
    let eps = 1e-9 * dt;
    let is_pre_fault = |t: f64| fault_time.is_none_or(|tf| t < tf - eps);

    let mut alarms = Vec::new();
    let mut confirmed = Vec::with_capacity(d_series.len());
    let mut streak = 0usize;
    let mut first_confirmed_alarm = None;
    let mut detection_delay = None;
    let mut false_confirmed = 0;
    let (mut healthy, mut healthy_raw) = (0usize, 0usize);
    for (k, &d) in d_series.iter().enumerate() {
        let t = run.t[k];
        let raw = d > det.threshold;
        if is_pre_fault(t) {
            healthy += 1;
            healthy_raw += usize::from(raw);
        }
        if raw {
            alarms.push((t, d));
            streak += 1;
        } else {
            streak = 0;
        }
        let on = streak >= hold;
        confirmed.push(on);
        if streak == hold {
            first_confirmed_alarm.get_or_insert(t);
            match fault_time {
                Some(tf) if !is_pre_fault(t) => {
                    detection_delay.get_or_insert((t - tf).max(0.0));
                }
                _ => false_confirmed += 1,
            }
        }
    }
    let far = if healthy == 0 {
        0.0
    } else {
        healthy_raw as f64 / healthy as f64
    };
    Ok(DetectionReport {
        t: run.t.clone(),
        d_series,
        threshold: det.threshold,
        alpha: det.alpha,
        hold,
        alarms,
        confirmed,
        first_confirmed_alarm,
        fault_time,
        detection_delay,
        false_confirmed,
        far,
    })
}
