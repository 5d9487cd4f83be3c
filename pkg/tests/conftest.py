import os
import sys

# tests import the independent oracle module by name
sys.path.insert(0, os.path.dirname(__file__))
