# Utils package for kitaev-lab
