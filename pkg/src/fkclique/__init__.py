"""Semi-random planted clique toolkit.

Subpackages cover instance generation (`graphs`), exhaustive ground-truth
search (`oracle`), biclique-refutation certificates (`certify`), a splitting
SDP solver (`sdp`), moment-matrix clique relaxations (`sos`), rounding-by-votes
list decoding (`listdecode`), low-degree likelihood-ratio analysis (`lowdeg`),
and a CLI front end (`cli`).
"""

__version__ = "0.1.0"
