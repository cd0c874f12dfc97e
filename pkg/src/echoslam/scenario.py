"""Scenario orchestration: simulate, detect and reconstruct in one place.

Works on the pydantic scenario models so the service endpoints and the CLI
share one implementation.  All randomness derives from the scenario seed via
independent per-point streams.
"""

from __future__ import annotations

import base64
import math

import numpy as np

from . import fileio
from .acoustic import Waveform, correlate_windowed, make_chirp, rir_from_room, simulate_received
from .forward import EchoSet, corrupt_echo_set, echo_set, with_common_spurious
from .geometry import ConvexRoom, room_in_frame, transform_point, wrap_angle
from .models import (
    AcousticsModel,
    EchoSetModel,
    GroundTruthModel,
    PeakConfigModel,
    PipelineReport,
    ScenarioSpec,
    SimulateResponse,
    SlamConfigModel,
    SolutionModel,
    WaveformModel,
)
from .peaks import PeakConfig, detect_peaks, to_candidate_distances
from .reconstruct import (
    BudgetExceededError,
    CandidateSolution,
    NoSolutionError,
    SlamConfig,
    slam,
    solution_to_dict,
)

POINT_IDS = ("o1", "o2", "o3")


def scenario_room(spec: ScenarioSpec) -> ConvexRoom:
    return fileio.room_from_dict(spec.room.model_dump(exclude_none=True))


def scenario_points(spec: ScenarioSpec) -> np.ndarray:
    if spec.points is not None:
        return np.asarray(spec.points, dtype=float)
    p = spec.path
    h = math.radians(p.heading_deg)
    o1 = np.asarray(p.o1, dtype=float)
    o2 = o1 + p.d12 * np.array([math.cos(h), math.sin(h)])
    o3 = o2 + p.d23 * np.array([math.cos(h + p.phi_rad), math.sin(h + p.phi_rad)])
    return np.stack([o1, o2, o3])


def _steps(points: np.ndarray) -> tuple[float, float, float, float]:
    """(d12, d23, heading, phi) of a measured triple."""
    v1 = points[1] - points[0]
    v2 = points[2] - points[1]
    heading = math.atan2(v1[1], v1[0])
    phi = wrap_angle(math.atan2(v2[1], v2[0]) - heading)
    return float(np.hypot(*v1)), float(np.hypot(*v2)), heading, phi


def slam_config(model: SlamConfigModel) -> SlamConfig:
    return SlamConfig(
        eps=model.eps,
        v_th=model.v_th,
        k_min=model.k_min,
        k_max=model.k_max,
        angular_tol=model.angular_tol,
        exhaustive_signs=model.exhaustive_signs,
        budget=model.budget,
        angle_constraint=model.angle_constraint,
        allow_reflection=model.allow_reflection,
        jobs=model.jobs,
    )


def peak_config(model: PeakConfigModel, c: float) -> PeakConfig:
    return PeakConfig(
        d_min=model.d_min_m,
        d_max=model.d_max_m,
        min_separation=model.min_separation_m,
        c=c,
        prominence_ratio=model.prominence_ratio,
        max_peaks=model.max_peaks,
        min_magnitude_ratio=model.min_magnitude_ratio,
        taper_to_ratio=model.taper_to_ratio,
    )


def echo_set_model(point_id: str, e: EchoSet) -> EchoSetModel:
    return EchoSetModel(
        point_id=point_id,
        distances=[float(d) for d in e.distances],
        labels=None if e.labels is None else [list(l) for l in e.labels],
    )


def echo_set_from_model(m: EchoSetModel) -> EchoSet:
    labels = None if m.labels is None else tuple(tuple(l) for l in m.labels)
    return EchoSet(np.asarray(m.distances, dtype=float), labels)


def waveform_model(point_id: str, w: Waveform) -> WaveformModel:
    data = np.asarray(w.samples, dtype="<f4").tobytes()
    return WaveformModel(
        point_id=point_id,
        sample_rate_hz=w.sample_rate,
        n_samples=w.n,
        samples_b64=base64.b64encode(data).decode("ascii"),
    )


def waveform_from_model(m: WaveformModel) -> Waveform:
    raw = base64.b64decode(m.samples_b64)
    samples = np.frombuffer(raw, dtype="<f4", count=m.n_samples).astype(float)
    return Waveform(samples, m.sample_rate_hz)


def solution_model(sol: CandidateSolution) -> SolutionModel:
    return SolutionModel(**solution_to_dict(sol))


def ground_truth(spec: ScenarioSpec) -> GroundTruthModel:
    """Reference solution in the O1 frame (O2 on the +x axis)."""
    room = scenario_room(spec)
    points = scenario_points(spec)
    d12, d23, heading, phi = _steps(points)
    room_f = room_in_frame(room, points[0], heading)
    o3_f = transform_point(points[2], points[0], heading)
    first = [
        echo_set_model(pid, echo_set(room, p, max_order=1))
        for pid, p in zip(POINT_IDS, points)
    ]
    solution = SolutionModel(
        k=room_f.k,
        phi_rad=phi,
        var_phi=0.0,
        walls=[
            {"normal_angle_deg": math.degrees(w.normal_angle), "offset_m": w.offset}
            for w in room_f.walls
        ],
        vertices=[(float(x), float(y)) for x, y in room_f.vertices],
        o2=(d12, 0.0),
        o3=(float(o3_f[0]), float(o3_f[1])),
    )
    return GroundTruthModel(solution=solution, d12=d12, d23=d23, first_order=first)


def simulate_echoes(spec: ScenarioSpec) -> list[EchoSet]:
    """Per-point echo sets with the scenario's corruption applied."""
    room = scenario_room(spec)
    points = scenario_points(spec)
    ac = spec.acoustics
    sets = [
        echo_set(room, p, max_order=ac.max_order, d_max=ac.d_max_m) for p in points
    ]
    noise = spec.noise
    if noise.sigma_m > 0 or noise.n_spurious > 0:
        seeds = np.random.SeedSequence(spec.seed).generate_state(3)
        sets = [
            corrupt_echo_set(
                e, noise.sigma_m, noise.n_spurious, seed=int(seeds[j])
            )
            for j, e in enumerate(sets)
        ]
    else:
        sets = [EchoSet(e.distances.copy(), None) for e in sets]
    if noise.common_spurious_m:
        sets = with_common_spurious(sets, noise.common_spurious_m)
    return sets


def simulate_waveforms(spec: ScenarioSpec) -> list[Waveform]:
    """Received signals at the three points for the scenario's chirp."""
    room = scenario_room(spec)
    points = scenario_points(spec)
    ac = spec.acoustics
    chirp = make_chirp(ac.f0_hz, ac.f1_hz, ac.chirp_duration_s, ac.sample_rate_hz)
    snr = math.inf if spec.noise.snr_db is None else spec.noise.snr_db
    seeds = np.random.SeedSequence(spec.seed).generate_state(3)
    out = []
    for j, p in enumerate(points):
        rir = rir_from_room(
            room,
            p,
            max_order=ac.max_order,
            d_max=ac.d_max_m,
            c=ac.c_mps,
            tau0=ac.tau0_s,
            reflection_gain=ac.reflection_gain,
            los_gain=ac.los_gain,
        )
        out.append(
            simulate_received(
                chirp, rir, snr_db=snr, seed=int(seeds[j]) if math.isfinite(snr) else None
            )
        )
    return out


def detect_waveforms(
    waveforms: list[Waveform], ac: AcousticsModel, pk: PeakConfigModel
) -> list[EchoSet]:
    chirp = make_chirp(ac.f0_hz, ac.f1_hz, ac.chirp_duration_s, ac.sample_rate_hz)
    cfg = peak_config(pk, c=ac.c_mps)
    sets = []
    for w in waveforms:
        m = correlate_windowed(w, chirp)
        sets.append(to_candidate_distances(detect_peaks(m, cfg)))
    return sets


def run_simulate(spec: ScenarioSpec, include_waveforms: bool, dedup: bool) -> SimulateResponse:
    sets = simulate_echoes(spec)
    if dedup:
        sets = [e.dedup() for e in sets]
    echoes = [echo_set_model(pid, e) for pid, e in zip(POINT_IDS, sets)]
    waveforms = None
    if include_waveforms:
        waveforms = [
            waveform_model(pid, w)
            for pid, w in zip(POINT_IDS, simulate_waveforms(spec))
        ]
    return SimulateResponse(
        echoes=echoes, ground_truth=ground_truth(spec), waveforms=waveforms
    )


def _match_wall_errors(sol: CandidateSolution, truth: GroundTruthModel) -> list[float]:
    """Greedy circular matching of recovered wall angles to the truth (degrees)."""
    true_angles = [math.radians(w.normal_angle_deg) for w in truth.solution.walls]
    rec = sorted(w.normal_angle for w in sol.room.walls)
    errors = []
    remaining = list(rec)
    for t in true_angles:
        diffs = [abs(wrap_angle(r - t)) for r in remaining]
        i = int(np.argmin(diffs))
        errors.append(math.degrees(diffs[i]))
        remaining.pop(i)
    return errors


def run_pipeline(
    spec: ScenarioSpec,
    config: SlamConfigModel,
    use_waveforms: bool = False,
    include_timing: bool = False,
) -> PipelineReport:
    """Simulate, (optionally) detect, reconstruct, and score against the truth."""
    import time

    t_start = time.perf_counter()
    truth = ground_truth(spec)
    if use_waveforms or (
        spec.noise.snr_db is not None and math.isfinite(spec.noise.snr_db)
    ):
        sets = detect_waveforms(simulate_waveforms(spec), spec.acoustics, spec.peaks)
    else:
        sets = simulate_echoes(spec)
    try:
        sol = slam(*sets, d12=truth.d12, d23=truth.d23, cfg=slam_config(config))
    except NoSolutionError:
        return PipelineReport(status="no_solution", k_true=truth.solution.k)
    except BudgetExceededError:
        return PipelineReport(status="budget_exceeded", k_true=truth.solution.k)

    true_verts = np.asarray(truth.solution.vertices, dtype=float)
    rec_verts = sol.room.vertices
    d = np.linalg.norm(true_verts[:, None, :] - rec_verts[None, :, :], axis=2)
    hausdorff = float(max(d.min(axis=0).max(), d.min(axis=1).max()))
    o3_err = float(np.hypot(*(sol.geometry.o3 - np.asarray(truth.solution.o3))))
    report = PipelineReport(
        status="ok",
        k_true=truth.solution.k,
        k_recovered=sol.k,
        wall_angle_errors_deg=(
            _match_wall_errors(sol, truth) if sol.k == truth.solution.k else None
        ),
        vertex_hausdorff_m=hausdorff,
        phi_error_rad=abs(wrap_angle(sol.phi - truth.solution.phi_rad)),
        o3_error_m=o3_err,
        var_phi=sol.var_phi,
        combinations_examined=sol.diagnostics.get("combinations_examined"),
        solution=solution_model(sol),
    )
    if include_timing:
        report.timing_s = time.perf_counter() - t_start
    return report
