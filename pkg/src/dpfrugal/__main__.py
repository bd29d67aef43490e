import sys

from dpfrugal.cli import main

sys.exit(main())
