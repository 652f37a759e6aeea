"""Exact combinatorics of crooked maps, circle-map types and inverse-sequence games."""
from .errors import DomainError
from .interval import (PLMap, SimplicialMap, build_simplicial, compose, compose_pl, modulus,
                       realize, sup_dist)
from .crooked import (canonical, canonical_crooked, certify_canonical, crn, eps_crooked_decide,
                      eval_point, is_crooked)
from .factor import (amalgamate_interval, cofactor_to_canonical, crooked_factorize,
                     factor_through_canonical, simplicial_approximate)
from .circle import (CircleMap, CircularSimplicialMap, circle_dist, compose_circle,
                     crooked_circle_map, degree, is_circularly_crooked, rogers_witness_check)
from .supernatural import (NoSolution, Supernatural, TypeClass, multiplication_solve,
                           type_equiv, type_of_sequence)
from .game import lewis_minc, play, verify_transcript

__version__ = "0.1.0"
