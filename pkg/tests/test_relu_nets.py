import json
import math

import numpy as np
import pytest

from paritylab.backend import K
from paritylab.hypercube import CubePoint, SubsetMask, parity
from paritylab.relu_nets import (
    OneHiddenLayerNet,
    SingleNeuron,
    build_exact_parity_net,
    build_weak_single_neuron,
    forward,
    forward_on_cube,
    parameter_norm,
)


class TestNetTypes:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            OneHiddenLayerNet(u=[1.0, 2.0], W=np.zeros((3, 4)), b=[0.0, 0.0])
        with pytest.raises(ValueError):
            OneHiddenLayerNet(u=[1.0], W=np.zeros((1, 2)), b=[np.nan])

    def test_net_json_roundtrip(self):
        net = OneHiddenLayerNet(
            u=[1.0, -2.0], W=[[0.5, 1.0], [-1.0, 0.0]], b=[0.1, -0.2]
        )
        back = OneHiddenLayerNet.from_json_dict(json.loads(json.dumps(net.to_json_dict())))
        np.testing.assert_array_equal(back.u, net.u)
        np.testing.assert_array_equal(back.W, net.W)
        np.testing.assert_array_equal(back.b, net.b)

    def test_width_zero_allowed(self):
        net = OneHiddenLayerNet(u=np.zeros(0), W=np.zeros((0, 4)), b=np.zeros(0))
        assert net.n == 0 and net.d == 4
        assert forward(net, CubePoint(0b1010, 4)) == 0.0

    def test_neuron_validation(self):
        with pytest.raises(ValueError):
            SingleNeuron(sign=2, w=[1.0])
        with pytest.raises(ValueError):
            SingleNeuron(sign=1, w=[1.0], b=math.inf)

    def test_neuron_json_roundtrip(self):
        neuron = SingleNeuron(sign=-1, w=[0.25, -0.5], b=1.5)
        back = SingleNeuron.from_json_dict(json.loads(json.dumps(neuron.to_json_dict())))
        assert back.sign == -1 and back.b == 1.5
        np.testing.assert_array_equal(back.w, neuron.w)


class TestForward:
    def test_zero_net_is_zero(self):
        net = OneHiddenLayerNet(u=np.zeros(2), W=np.zeros((2, 3)), b=np.zeros(2))
        for bits in range(8):
            assert forward(net, CubePoint(bits, 3)) == 0.0

    def test_constant_net(self):
        net = OneHiddenLayerNet(u=[1.0], W=np.zeros((1, 3)), b=[1.0])
        for bits in range(8):
            assert forward(net, CubePoint(bits, 3)) == 1.0

    def test_homogeneous_in_u(self):
        g = np.random.default_rng(2)
        net = OneHiddenLayerNet(
            u=g.standard_normal(3), W=g.standard_normal((3, 4)), b=g.standard_normal(3)
        )
        scaled = OneHiddenLayerNet(u=2.5 * net.u, W=net.W, b=net.b)
        for bits in range(16):
            x = CubePoint(bits, 4)
            assert forward(scaled, x) == pytest.approx(2.5 * forward(net, x), rel=1e-12)

    def test_forward_on_cube_matches_pointwise(self):
        g = np.random.default_rng(3)
        net = OneHiddenLayerNet(
            u=g.standard_normal(2), W=g.standard_normal((2, 5)), b=g.standard_normal(2)
        )
        table = forward_on_cube(net)
        for bits in range(1 << 5):
            assert table[bits] == pytest.approx(
                forward(net, CubePoint(bits, 5)), abs=1e-12
            )

    def test_single_neuron_forward(self):
        neuron = SingleNeuron(sign=-1, w=[1.0, 1.0], b=-0.5)
        assert forward(neuron, CubePoint.from_vector([1, 1])) == -1.5
        assert forward(neuron, CubePoint.from_vector([-1, 1])) == 0.0


class TestParameterNorm:
    def test_three_four_five(self):
        net = OneHiddenLayerNet(u=[3.0], W=[[4.0, 0.0]], b=[0.0])
        assert parameter_norm(net) == 5.0

    def test_zero_net(self):
        net = OneHiddenLayerNet(u=np.zeros(2), W=np.zeros((2, 2)), b=np.zeros(2))
        assert parameter_norm(net) == 0.0


class TestExactParityNet:
    def test_two_dim_frozen_weights(self):
        # |S| = 2: three neurons, all rows -1_S, biases 3, 1, -1, u = 1, -4, 8
        s = SubsetMask.first_k(2, 2)
        net = build_exact_parity_net(2, s)
        assert net.n == 3
        np.testing.assert_array_equal(net.u, [1.0, -4.0, 8.0])
        np.testing.assert_array_equal(net.b, [3.0, 1.0, -1.0])
        np.testing.assert_array_equal(net.W, np.full((3, 2), -1.0))
        for bits in range(4):
            x = CubePoint(bits, 2)
            assert forward(net, x) == parity(s, x)

    def test_three_dim_exhaustive(self):
        s = SubsetMask.first_k(3, 3)
        net = build_exact_parity_net(3, s)
        for bits in range(8):
            x = CubePoint(bits, 3)
            assert forward(net, x) == parity(s, x)

    @pytest.mark.parametrize("d", range(2, 9))
    def test_all_subsets_exact(self, d):
        for bits in range(1, 1 << d):
            s = SubsetMask(bits, d)
            net = build_exact_parity_net(d, s)
            np.testing.assert_array_equal(forward_on_cube(net), K.parity_table(bits, d))

    def test_embedded_subset(self):
        # S need not span all of [d]
        s = SubsetMask.from_indices([1, 3, 4], 7)
        net = build_exact_parity_net(7, s)
        np.testing.assert_array_equal(forward_on_cube(net), K.parity_table(s.bits, 7))

    def test_norm_bound(self):
        g = np.random.default_rng(4)
        for _ in range(20):
            d = int(g.integers(1, 15))
            bits = int(g.integers(1, 1 << d))
            s = SubsetMask(bits, d)
            net = build_exact_parity_net(d, s)
            assert parameter_norm(net) <= 6.0 * s.size**1.5

    def test_norm_bound_size_four(self):
        s = SubsetMask.first_k(4, 6)
        assert parameter_norm(build_exact_parity_net(6, s)) <= 48.0

    def test_rejects_empty_subset(self):
        with pytest.raises(ValueError):
            build_exact_parity_net(3, SubsetMask(0, 3))


class TestWeakSingleNeuron:
    def test_rejects_odd_size(self):
        with pytest.raises(ValueError):
            build_weak_single_neuron(SubsetMask.first_k(3, 3))

    def test_structure_size_four(self):
        s = SubsetMask.first_k(4, 4)
        neuron = build_weak_single_neuron(s)
        assert neuron.sign == -1  # (-1)^{(4-2)/2}
        assert neuron.b == 0.0
        np.testing.assert_allclose(neuron.w, np.full(4, 0.5 * 4**-1.5), atol=1e-15)

    def test_sign_alternates(self):
        assert build_weak_single_neuron(SubsetMask.first_k(6, 6)).sign == 1
        assert build_weak_single_neuron(SubsetMask.first_k(8, 8)).sign == -1

    def test_zero_outside_subset(self):
        s = SubsetMask.from_indices([0, 2, 3, 5], 8)
        neuron = build_weak_single_neuron(s)
        for i in range(8):
            if s.contains(i):
                assert neuron.w[i] != 0.0
            else:
                assert neuron.w[i] == 0.0
