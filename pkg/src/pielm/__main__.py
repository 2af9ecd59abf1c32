import sys

from pielm.cli import main

sys.exit(main())
