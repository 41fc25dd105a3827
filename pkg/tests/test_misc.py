import numpy as np
import pytest

from food.gradcheck import check_gradients, numerical_gradient
from food.layers import mse
from food.misc import chunks, elapsed, parallel_map
from food.tensor import Tensor

def test_elapsed():

    assert elapsed(0.0,1.25) == '1.2 secs'
    assert elapsed(0.0,125.0) == '2 mins 5 secs'
    assert elapsed(0.0,2*3600+60) == '2 hours 1 mins'
    assert elapsed(10.0,10.0) == '0.0 secs'

def test_chunks():

    assert chunks(5,2) == [(0,2),(2,4),(4,5)]
    assert chunks(4,4) == [(0,4)]
    assert chunks(0,3) == []

def test_parallel_map_keeps_order():

    def work(i):
        return i*i

    assert parallel_map(work,range(20),threads=4) == [i*i for i in range(20)]
    assert parallel_map(work,range(5)) == [0,1,4,9,16]
    assert parallel_map(work,[]) == []

def test_numerical_gradient_of_mse():

    a = Tensor(np.array([1.0,2.0,4.0]),requires_grad=True)
    b = Tensor(np.array([0.0,2.0,1.0]))

    grad = numerical_gradient(lambda: mse(a,b),a,eps=1e-6)

    np.testing.assert_allclose(grad,2.0*(a.data-b.data)/3.0,atol=1e-8)
    np.testing.assert_array_equal(a.data,[1.0,2.0,4.0])

def test_check_gradients():

    a = Tensor(np.array([1.0,-2.0,0.5]),requires_grad=True)
    b = Tensor(np.zeros(3))

    errors = check_gradients(lambda: mse(a,b),{'a': a},eps=1e-6)
    assert errors['a'] < 1e-7

    c = Tensor(np.zeros(3),requires_grad=True)
    errors = check_gradients(lambda: mse(a,b),{'a': a,'c': c},eps=1e-6)
    assert errors['c'] == pytest.approx(0.0)
