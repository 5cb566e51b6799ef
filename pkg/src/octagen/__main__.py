from octagen.cli import main

raise SystemExit(main())
