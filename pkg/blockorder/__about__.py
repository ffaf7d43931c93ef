
__version__ = "0.1.0"

__title__ = "blockorder"
__summary__ = "Penalized Krichevsky-Trofimov order estimation for " \
              "multi-layer and dynamic stochastic block models"
__license__ = "Apache 2.0"

__author__ = "blockorder developers"
__email__ = "blockorder-dev@users.noreply.github.com"

__url__ = "https://github.com/blockorder/blockorder"
__urls__ = {
    'GitHub': __url__,
    'Documentation': 'https://blockorder.readthedocs.io',
    'Issue tracker': 'https://github.com/blockorder/blockorder/issues'
}
