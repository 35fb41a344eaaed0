# Third party modules
import numpy as np
from pytest import approx, raises
from scipy.integrate import trapezoid

# Local modules
from nanonet.yagi_suite.antenna import (
    AntennaLayout,
    AntennaModel,
    BeamConfig,
    ChannelPotentials,
    Element,
    ElementState,
    RadiationPattern,
    all_beams,
    beam_roles,
    drive_vector,
    dual_band_potentials,
    evaluate_beam,
    far_field,
    impedance_matrix,
    mutual_impedance,
    pattern_gain,
    pattern_metrics,
    radiation_efficiency,
    radiation_resistance,
    residual_conductivity_sweep,
    self_impedance,
    solve_currents,
    state_for_beam
)
from nanonet.yagi_suite.exceptions import (
    InvalidConfigError,
    InvalidParameterError,
    SingularMatrixError
)
from nanonet.yagi_suite.physics import thermal_drude_weight


layout = AntennaLayout.default()
model = AntennaModel()
eta = model.eta


def _beam(direction):
    return BeamConfig('directional', direction)


def test_default_layout():
    assert len(layout) == 10
    assert [driver.index for driver in layout.drivers()] == [1, 6]
    assert layout.find('Y', 40e-6).index == 3
    assert layout.find('X', -25e-6).index == 9
    assert layout.find('X', 10e-6) is None

    ring = AntennaLayout.default(third_ring=True)

    assert len(ring) == 14
    assert ring.find('Y', 75e-6).index == 11
    assert ring.find('X', -75e-6).index == 14


def test_invalid_layouts():
    elements = list(layout.elements)

    with raises(InvalidConfigError):
        AntennaLayout(tuple(elements + [Element(11, 'Y', 40e-6)]))

    with raises(InvalidConfigError):
        AntennaLayout(tuple(elements + [Element(11, 'Z', 90e-6)]))

    with raises(InvalidConfigError):
        AntennaLayout(tuple(elements[1:]))


def test_beam_config():
    assert BeamConfig().label == 'omni'
    assert BeamConfig.parse('-Y') == _beam('-Y')
    assert BeamConfig.parse('omni') == BeamConfig()
    assert len(all_beams) == 5

    with raises(InvalidConfigError):
        BeamConfig('omni', '+X')

    with raises(InvalidConfigError):
        BeamConfig('directional', 'up')

    with raises(InvalidConfigError):
        BeamConfig('sector', '+X')


def test_beam_roles():
    omni = beam_roles(BeamConfig(), layout)

    assert omni[0] == omni[5] == 'driver'
    assert omni.count('off') == 8

    expected = {
        '+Y': {1: 'driver', 3: 'parasitic', 4: 'parasitic'},
        '-Y': {1: 'driver', 5: 'parasitic', 2: 'parasitic'},
        '+X': {6: 'driver', 8: 'parasitic', 9: 'parasitic'},
        '-X': {6: 'driver', 10: 'parasitic', 7: 'parasitic'},
    }

    for direction, roles in expected.items():
        result = beam_roles(_beam(direction), layout)

        for index, role in enumerate(result, start=1):
            assert role == roles.get(index, 'off')


def test_beam_roles_need_matching_offsets():
    with raises(InvalidConfigError):
        beam_roles(_beam('+Y'), layout, director_offset=75e-6)


def test_state_for_beam():
    state = state_for_beam(_beam('+X'), ChannelPotentials(), layout)

    assert state.potential(6) == 0.5
    assert state.potential(8) == state.potential(9) == 0.8
    assert state.potential(1) == 0


def test_invalid_potentials():
    with raises(InvalidParameterError):
        ChannelPotentials(driver=0)

    with raises(InvalidParameterError):
        ChannelPotentials(driver=0.5, parasitic=0.4)

    with raises(InvalidParameterError):
        ElementState((0.5, -0.1))


def test_radiation_resistance_is_zero_spacing_mutual_resistance():
    k = model.coupling_wavenumber(2.3e12)

    resistance = radiation_resistance(25e-6, k, eta)

    assert resistance > 0
    assert mutual_impedance(1e-8, 25e-6, k, eta).real == approx(
        resistance, rel=1e-5
    )
    assert radiation_resistance(25e-6, 2 * k, eta) > resistance


def test_self_and_mutual_terms_share_one_wavenumber():
    element = layout.elements[0]
    weight = float(thermal_drude_weight(0.8, 300.0))
    tau = model.material.sheet.tau

    for coupling in ('effective', 'free_space'):
        medium = AntennaModel(coupling=coupling)
        k = medium.coupling_wavenumber(2.3e12)
        loss = element.length / (medium.width * tau * weight)

        Z = self_impedance(element, weight, 2.3e12, medium)

        assert Z.real - loss == approx(
            mutual_impedance(1e-8, element.length, k, eta).real, rel=1e-5
        )

    assert AntennaModel().coupling_wavenumber(2.3e12) == approx(
        model.wavenumber(2.3e12) * np.sqrt(5.15)
    )


def test_mutual_impedance_decays_with_spacing():
    k = model.coupling_wavenumber(2.3e12)

    near = abs(mutual_impedance(10e-6, 25e-6, k, eta))
    far = abs(mutual_impedance(200e-6, 25e-6, k, eta))

    assert far < near


def test_impedance_matrix_is_symmetric():
    state = state_for_beam(_beam('+Y'), ChannelPotentials(), layout)

    Z = impedance_matrix(layout, state, 2.3e12, model)

    assert Z.shape == (3, 3)
    assert np.allclose(Z, Z.T)
    assert np.all(np.diag(Z).real > 0)


def test_residual_conductivity_activates_every_element():
    state = state_for_beam(_beam('+Y'), ChannelPotentials(), layout)

    Z = impedance_matrix(layout, state, 2.3e12, model, rho=0.1)
    drive = drive_vector(layout, state, rho=0.1)

    assert Z.shape == (10, 10)
    assert drive[0] == 1
    assert np.count_nonzero(drive) == 1


def test_omni_drive_is_in_quadrature():
    state = state_for_beam(BeamConfig(), ChannelPotentials(), layout)

    assert list(drive_vector(layout, state)) == [1, 1j]


def test_solve_currents():
    Z = np.array([[2, 1], [1, 3]], dtype=complex)

    currents = solve_currents(Z, [1, 0])

    assert np.allclose(Z @ currents, [1, 0])

    with raises(SingularMatrixError):
        solve_currents(np.zeros((2, 2)), [1, 0])

    with raises(InvalidParameterError):
        solve_currents(np.zeros((2, 3)), [1, 0])


def test_radiation_efficiency_is_a_fraction():
    state = state_for_beam(_beam('+Y'), ChannelPotentials(), layout)

    efficiency = radiation_efficiency(layout, state, 2.3e12, model)

    assert 0 < efficiency < 1


def test_omni_pattern():
    pattern, metrics = evaluate_beam(layout, BeamConfig(), ChannelPotentials())

    assert pattern.frequency == approx(2.3e12, rel=1e-9)
    assert metrics.peak_directivity == approx(10 * np.log10(0.75), abs=0.01)
    assert pattern.directivity.max() == approx(1.5, abs=0.01)
    assert metrics.beamwidth_3db == 360
    assert metrics.front_to_back == approx(0, abs=1e-9)
    assert metrics.peak_gain < metrics.peak_directivity


def test_directional_beats_omni():
    omni = evaluate_beam(layout, BeamConfig(), ChannelPotentials())[1]

    for direction in ('+X', '-X', '+Y', '-Y'):
        metrics = evaluate_beam(layout, _beam(direction), ChannelPotentials())[1]

        assert metrics.peak_directivity > omni.peak_directivity
        assert metrics.front_to_back >= 3


def test_four_fold_symmetry():
    headings = {'+X': 0, '+Y': 90, '-X': 180, '-Y': 270}
    reference = evaluate_beam(layout, _beam('+X'), ChannelPotentials())[1]

    for direction, heading in headings.items():
        metrics = evaluate_beam(layout, _beam(direction), ChannelPotentials())[1]

        assert metrics.beam_direction == (90.0, heading)
        assert metrics.peak_gain == approx(reference.peak_gain, abs=1e-9)
        assert metrics.peak_directivity == approx(
            reference.peak_directivity, abs=1e-9
        )
        assert metrics.front_to_back == approx(
            reference.front_to_back, abs=1e-9
        )
        assert metrics.beamwidth_3db == approx(
            reference.beamwidth_3db, abs=1e-9
        )
        assert metrics.efficiency == approx(reference.efficiency, abs=1e-9)


def test_pattern_gain_follows_the_xy_cut():
    pattern, metrics = evaluate_beam(layout, _beam('+Y'), ChannelPotentials())
    cut = 10 * np.log10(pattern.xy_cut() * pattern.efficiency)

    assert pattern_gain(pattern, 90) == approx(cut[90])
    assert pattern_gain(pattern, 450) == approx(cut[90])
    assert pattern_gain(pattern, 90) - pattern_gain(pattern, 270) == approx(
        metrics.front_to_back
    )
    assert min(cut[0], cut[1]) <= pattern_gain(pattern, 0.5) <= max(
        cut[0], cut[1]
    )


def test_coarse_grid():
    coarse = AntennaModel(step=5)

    pattern, metrics = evaluate_beam(
        layout, _beam('+Y'), ChannelPotentials(), model=coarse
    )

    assert pattern.directivity.shape == (37, 72)
    assert metrics.beam_direction == (90.0, 90.0)

    with raises(InvalidParameterError):
        AntennaModel(step=7)


def test_residual_conductivity_sweep():
    rho_list = [0, 1 / 15, 1 / 10, 1 / 5]

    results = residual_conductivity_sweep(
        layout, _beam('+Y'), 2.3e12, rho_list
    )
    gains = [metrics.peak_gain for metrics in results]
    widths = [metrics.beamwidth_3db for metrics in results]

    assert gains == sorted(gains, reverse=True)
    assert widths == sorted(widths)
    assert gains[1] >= gains[0] - 0.5
    assert {metrics.beam_direction for metrics in results} == {(90.0, 90.0)}

    with raises(InvalidParameterError):
        residual_conductivity_sweep(layout, _beam('+Y'), 2.3e12, [1])


def test_dual_band_beam():
    ring = AntennaLayout.default(third_ring=True)

    pattern, metrics = evaluate_beam(ring, _beam('+Y'), dual_band_potentials)

    assert pattern.frequency == approx(1.5e12, rel=0.05)
    assert metrics.front_to_back > 0
    assert pattern_gain(pattern, 90) > pattern_gain(pattern, 270)


def test_mutual_impedance_decays_monotonically_beyond_two_wavelengths():
    for k in (model.wavenumber(2.3e12), model.coupling_wavenumber(2.3e12)):
        wavelength = 2 * np.pi / k
        spacings = np.linspace(2, 4, 81) * wavelength

        magnitudes = [
            abs(mutual_impedance(spacing, 25e-6, k, eta))
            for spacing in spacings
        ]

        assert np.all(np.diff(magnitudes) < 0)


def test_two_element_solve_matches_cramer():
    a, b, d = 120 + 35j, 24 - 12j, 180 - 60j
    determinant = a * d - b * b

    currents = solve_currents([[a, b], [b, d]], [1, 0])

    assert abs(currents[0] - d / determinant) <= 1e-12 * abs(d / determinant)
    assert abs(currents[1] + b / determinant) <= 1e-12 * abs(b / determinant)


def test_solve_currents_follows_element_order():
    state = state_for_beam(_beam('+Y'), ChannelPotentials(), layout)
    Z = impedance_matrix(layout, state, 2.3e12, model, rho=0.1)
    drive = drive_vector(layout, state, rho=0.1)
    order = np.random.default_rng(5).permutation(len(drive))

    currents = solve_currents(Z, drive)
    permuted = solve_currents(Z[np.ix_(order, order)], drive[order])

    assert np.allclose(permuted, currents[order], rtol=1e-10, atol=1e-18)


def test_pattern_is_normalised_over_the_sphere():
    for beam in all_beams:
        pattern = evaluate_beam(layout, beam, ChannelPotentials())[0]
        step = np.radians(pattern.phi[1] - pattern.phi[0])
        theta = np.radians(pattern.theta)

        total = trapezoid(
            pattern.directivity.sum(axis=1) * step * np.sin(theta), theta
        )

        assert total / (4 * np.pi) == approx(1, rel=0.01)


def test_single_dipole_is_omnidirectional_about_its_axis():
    state = ElementState((0.5,) + (0.0,) * 9)

    pattern = far_field(layout, state, [1.0], 2.3e12, model)
    D = pattern.directivity
    dbi = pattern.directivity_dbi
    yz = np.concatenate([dbi[:, 90], dbi[:, 270]])

    assert yz.max() - yz.min() < 0.01
    assert D[90, 0] < 1e-12 * D.max()
    assert D[90, 180] < 1e-12 * D.max()


def test_plus_and_minus_y_patterns_mirror_through_xz():
    plus = evaluate_beam(layout, _beam('+Y'), ChannelPotentials())[0]
    minus = evaluate_beam(layout, _beam('-Y'), ChannelPotentials())[0]
    count = minus.phi.size

    mirrored = minus.directivity[:, (-np.arange(count)) % count]

    assert np.allclose(plus.directivity, mirrored, rtol=1e-9, atol=1e-12)


def test_isotropic_pattern_metrics():
    pattern = RadiationPattern(
        theta=np.arange(181.0),
        phi=np.arange(360.0),
        directivity=np.ones((181, 360)),
        frequency=2.3e12
    )

    metrics = pattern_metrics(pattern)

    assert metrics.peak_directivity == 0
    assert metrics.peak_gain == 0
    assert metrics.beamwidth_3db == 360
    assert metrics.front_to_back == 0
    assert metrics.beam_direction == (90.0, 0.0)


def test_metrics_match_an_exhaustive_scan():
    pattern, metrics = evaluate_beam(layout, _beam('+Y'), ChannelPotentials())
    count = pattern.phi.size
    best = None

    for row, theta in enumerate(pattern.theta):
        for column, phi in enumerate(pattern.phi):
            value = pattern.directivity[row, column]
            if theta == 90 and (best is None or value > best[0]):
                best = (value, theta, phi, row, column)

    value, theta, phi, row, column = best
    opposite = pattern.directivity[row, (column + count // 2) % count]

    assert metrics.beam_direction == (theta, phi)
    assert metrics.peak_directivity == approx(10 * np.log10(value))
    assert metrics.peak_gain == approx(
        10 * np.log10(value * pattern.efficiency)
    )
    assert metrics.front_to_back == approx(10 * np.log10(value / opposite))
    assert pattern.directivity.max() >= value
