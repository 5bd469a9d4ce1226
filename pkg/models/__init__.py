# Models package for kitaev-lab
